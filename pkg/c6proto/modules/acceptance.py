"""
Acceptance Module
End-to-end checks of every protocol claim, each reported as one criterion.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

import config
from .campaign import CampaignSummary, FuzzCampaign
from .measure import (
    QIS1_BELL_NOTE,
    QIS2_GHZ_DECOMPOSITION,
    TELEPORT_BELL_DECOMPOSITION,
    MeasurementBasis,
    check_decomposition,
    check_orthonormal,
)
from .protocols import (
    CERTIFIED_LAYOUTS,
    CBIT_BUDGETS,
    capacity,
    dense_codebook,
    dense_decode,
    no_signaling_distance,
    outcome_distribution,
    rsp,
    rsp_basis,
    rsp_payloads,
    solo_guess_fidelity,
    teleport_basis,
)
from .qstate import Ket, SecretState, c6, max_bipartite_ebits
from .synth import infer_assignment
from .tables import (
    Layout,
    ValidationReport,
    iter_tables,
    load_source_table,
    load_table,
    outcome_gram,
    validate_table,
    verify_data_hashes,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CriterionResult:
    criterion: str
    title: str
    passed: bool
    message: str
    details: Dict = field(default_factory=dict)
    elapsed: float = field(default=0.0, compare=False)

    def to_dict(self) -> Dict:
        return {
            "criterion": self.criterion,
            "title": self.title,
            "passed": self.passed,
            "message": self.message,
            "details": self.details,
        }


def _listed(basis: MeasurementBasis) -> MeasurementBasis:
    return MeasurementBasis(basis.targets, basis.matrix[:basis.listed], basis.name)


def _campaign_details(summary: CampaignSummary) -> Dict:
    return {
        "trials": summary.trials,
        "min_fidelity": summary.min_fidelity,
        "mean_fidelity": summary.mean_fidelity,
        "cbits": {str(k): v for k, v in sorted(summary.cbits.items())},
        "failures": summary.failures[:10],
    }


def _uniform(protocol: str, secrets: List[SecretState], tol: float) -> Tuple[bool, float]:
    worst = 0.0
    for secret in secrets:
        probs = outcome_distribution(protocol, secret)
        worst = max(worst, float(np.max(np.abs(probs - 1.0 / len(probs)))))
    return worst <= tol, worst


def check_orthogonality(tol: float = config.EIGEN_TOL, data_dir=None) -> CriterionResult:
    protocol = check_orthonormal(_listed(teleport_basis()), tol)
    table = load_table("table1", data_dir)
    printed = outcome_gram(table, tol=tol)
    bell = check_decomposition(TELEPORT_BELL_DECOMPOSITION,
                               Ket(table.outcome_vector(table.row(1)), (1, 2, 3, 4, 5, 6)), tol=tol)
    printed_dev = max(printed.max_off_diagonal, printed.max_diagonal_deviation)
    if printed.passed:
        printed_note = f"printed table 1 is orthonormal (deviation {printed_dev:.3e})"
    else:
        printed_note = (f"printed table 1 is NOT orthonormal (deviation {printed_dev:.3e}, worst rows "
                        f"{printed.worst_pair[0] + 1} and {printed.worst_pair[1] + 1})")
    matching = [v.convention for v in bell if v.matches]
    bell_note = (f"Bell decomposition matches row 1 under the {', '.join(matching)} convention"
                 if matching else "Bell decomposition does NOT match row 1 under any convention")
    return CriterionResult(
        "1", "Teleportation basis orthogonality", protocol.passed,
        f"protocol basis deviation {max(protocol.max_off_diagonal, protocol.max_diagonal_deviation):.3e}; "
        f"{printed_note}; {bell_note}",
        {"protocol_basis": protocol.to_dict(), "printed_table": printed.to_dict(),
         "bell_decomposition": [v.to_dict() for v in bell]},
    )


def _protocol_campaign(criterion: str, title: str, protocol: str, trials: int, seed: int,
                       campaign: FuzzCampaign, tol: float, extra: Optional[Dict] = None,
                       extra_ok: bool = True) -> CriterionResult:
    summary = campaign.run(protocol, trials, seed)
    rng = np.random.default_rng(seed)
    secrets = [SecretState.random(rng) for _ in range(config.RANDOM_PAYLOADS)]
    uniform, worst = _uniform(protocol, secrets, tol)
    budget_ok = set(summary.cbits) == {CBIT_BUDGETS[protocol]}
    passed = summary.passed and uniform and budget_ok and extra_ok
    details = _campaign_details(summary)
    details["outcome_probability_deviation"] = worst
    details.update(extra or {})
    message = (
        f"{trials} trials, min fidelity {summary.min_fidelity:.12f}, "
        f"{CBIT_BUDGETS[protocol]} cbits {'every run' if budget_ok else 'NOT every run'}, "
        f"outcomes {'uniform' if uniform else 'NOT uniform'}"
    )
    return CriterionResult(criterion, title, passed, message, details)


def _stated_validation(table_name: str, data_dir, tol: float) -> ValidationReport:
    table = load_table(table_name, data_dir)
    return validate_table(table, c6(), Layout.from_assignment(table.stated), label="stated", tol=tol,
                          source_table=load_source_table(table))


def check_qis1(trials: int, seed: int, campaign: FuzzCampaign, tol: float, data_dir=None) -> CriterionResult:
    stated = _stated_validation("table2", data_dir, tol)
    table = load_table("table2", data_dir)
    bell = check_decomposition(QIS1_BELL_NOTE, Ket(table.outcome_vector(table.row(1)), (1, 2, 3, 4)), tol=tol)
    result = _protocol_campaign("3", "Splitting protocol 1", "qis1", trials, seed, campaign, tol, {
        "stated_assignment": stated.to_dict()["summary"],
        "stated_mismatched_rows": stated.mismatched_rows,
        "bell_note": [v.to_dict() for v in bell],
    })
    note = f"; stated assignment reproduces {stated.matched}/{len(stated.rows)} rows"
    if stated.mismatched_rows:
        note += f" (rows {', '.join(map(str, stated.mismatched_rows))} flagged)"
    return CriterionResult(result.criterion, result.title, result.passed, result.message + note, result.details)


def check_qis2(trials: int, seed: int, campaign: FuzzCampaign, tol: float, data_dir=None) -> CriterionResult:
    table = load_table("table4", data_dir)
    row_ket = Ket(table.outcome_vector(table.row(1)), (1, 2, 3, 4, 5))
    verdicts = check_decomposition(QIS2_GHZ_DECOMPOSITION, row_ket, tol=tol)
    expansion_ok = any(v.matches for v in verdicts)
    stated = _stated_validation("table4", data_dir, tol)
    result = _protocol_campaign("4", "Splitting protocol 2", "qis2", trials, seed, campaign, tol, {
        "ghz_expansion": [v.to_dict() for v in verdicts],
        "stated_assignment": stated.to_dict()["summary"],
        "stated_mismatched_rows": stated.mismatched_rows,
    }, extra_ok=expansion_ok)
    note = "; GHZ expansion matches row 1" if expansion_ok else "; GHZ expansion does NOT match row 1"
    return CriterionResult(result.criterion, result.title, result.passed, result.message + note, result.details)


def check_dense_coding(tol: float = config.EIGEN_TOL) -> CriterionResult:
    value = capacity(c6(), {1, 6, 4})
    words = np.vstack([k.amplitudes for k in dense_codebook()])
    gram_dev = float(np.max(np.abs(words.conj() @ words.T - np.eye(len(words)))))
    roundtrip = all(dense_decode(k).to_int() == n for n, k in enumerate(dense_codebook()))
    passed = abs(value - 5.0) <= 1e-9 and gram_dev <= tol and roundtrip
    return CriterionResult(
        "5", "Dense coding", passed,
        f"capacity {value:.12f}, codebook Gram deviation {gram_dev:.3e}, "
        f"decode(encode(m)) {'is' if roundtrip else 'is NOT'} the identity",
        {"capacity": value, "gram_deviation": gram_dev, "roundtrip": roundtrip},
    )


def check_rsp(seed: int, tol: float = config.EIGEN_TOL) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_gram, worst_prob, worst_completion, min_fid, cbits_ok = 0.0, 0.0, 0.0, 1.0, True
    for secret in rsp_payloads(config.RSP_PHI_GRID):
        basis = rsp_basis(secret)
        gram = check_orthonormal(_listed(basis), tol)
        worst_gram = max(worst_gram, gram.max_off_diagonal, gram.max_diagonal_deviation)
        probs = outcome_distribution("rsp", secret)
        worst_prob = max(worst_prob, float(np.max(np.abs(probs - 0.25))))
        worst_completion = max(worst_completion, abs(1.0 - float(np.sum(probs))))
        phi = float(np.angle(secret.mu))
        transcript = rsp(phi, rng)
        min_fid = min(min_fid, transcript.fidelity)
        cbits_ok = cbits_ok and transcript.cbits == 2
    passed = (worst_gram <= tol and worst_prob <= tol and worst_completion <= config.COMPLETION_TOL
              and min_fid >= 1.0 - tol and cbits_ok)
    return CriterionResult(
        "6", "Remote state preparation", passed,
        f"{config.RSP_PHI_GRID} phases, min fidelity {min_fid:.12f}, outcome deviation {worst_prob:.3e}",
        {"gram_deviation": worst_gram, "probability_deviation": worst_prob,
         "completion_probability": worst_completion, "min_fidelity": min_fid, "cbits_two": cbits_ok},
    )


def check_security(trials: int, seed: int) -> CriterionResult:
    rng = np.random.default_rng(seed)
    secrets = [SecretState.random(rng) for _ in range(trials)]
    mean1 = float(np.mean([solo_guess_fidelity("qis1", s) for s in secrets]))
    mean2 = float(np.mean([solo_guess_fidelity("qis2", s) for s in secrets]))
    holds = mean2 >= mean1 - 1e-6
    verdict = "claim holds" if holds else "claim FAILS: the second protocol is not easier to guess"
    return CriterionResult(
        "7", "Solo guessing comparison", holds,
        f"mean solo-guess fidelity qis1 {mean1:.3f}, qis2 {mean2:.3f}; {verdict}",
        {"qis1": round(mean1, 3), "qis2": round(mean2, 3), "trials": trials},
    )


def check_impossibility(tol: float = config.EIGEN_TOL) -> CriterionResult:
    value, cut = max_bipartite_ebits(c6(), 3)
    passed = abs(value - 2.0) <= tol
    return CriterionResult(
        "8", "Three-qubit payload impossibility", passed,
        f"max ebits over 3|3 cuts {value:.12f} at {cut} (< 3)",
        {"max_ebits": value, "partition": [str(q) for q in cut]},
    )


def check_no_signaling(seed: int, tol: float = config.EIGEN_TOL) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst: Dict[str, float] = {}
    for protocol in ("teleport", "qis1", "qis2", "rsp"):
        distances = []
        for _ in range(config.NO_SIGNALING_PAIRS):
            if protocol == "rsp":
                pair = [SecretState.phase_family(phi) for phi in rng.uniform(0.0, 2.0 * np.pi, 2)]
            else:
                pair = [SecretState.random(rng), SecretState.random(rng)]
            distances.append(no_signaling_distance(protocol, *pair))
        worst[protocol] = float(max(distances))
    passed = all(d <= tol for d in worst.values())
    return CriterionResult(
        "9", "No signaling before classical bits", passed,
        "max trace distance " + ", ".join(f"{p} {d:.3e}" for p, d in worst.items()),
        {"max_trace_distance": worst, "pairs": config.NO_SIGNALING_PAIRS},
    )


def check_table_data(data_dir=None, tol: float = config.EIGEN_TOL) -> CriterionResult:
    hashes = verify_data_hashes(data_dir)
    tables = {}
    for table in iter_tables(data_dir=data_dir):
        source = load_source_table(table)
        report = validate_table(table, c6(), CERTIFIED_LAYOUTS[table.table_id], label="certified", tol=tol,
                                source_table=source)
        if not report.explained:
            report = infer_assignment(table, c6(), source_table=source, tol=tol).validation
        tables[table.table_id] = {
            "assignment": report.label,
            "matched": report.matched,
            "rows": len(report.rows),
            "errata": len(table.errata),
            "undocumented_rows": report.undocumented_rows,
        }
    hashes_ok = all(hashes.values()) and bool(hashes)
    explained = all(not t["undocumented_rows"] for t in tables.values())
    problems = [f"table {tid} rows {t['undocumented_rows']} undocumented"
                for tid, t in tables.items() if t["undocumented_rows"]]
    problems += [f"{name} hash mismatch" for name, ok in hashes.items() if not ok]
    return CriterionResult(
        "T", "Table data and errata", hashes_ok and explained,
        "; ".join(problems) if problems else "all tables hashed and every mismatch documented",
        {"hashes": hashes, "tables": tables},
    )


def run_acceptance(seed: int = config.DEFAULT_SEED, trials: int = config.ACCEPTANCE_TRIALS,
                   data_dir: Optional[Union[str, Path]] = None, workers: int = config.MAX_WORKERS,
                   tol: float = config.EIGEN_TOL) -> List[CriterionResult]:
    """Run every acceptance criterion and return the results in order."""
    campaign = FuzzCampaign(workers=workers, tol=tol)
    checks: List[Tuple[str, Callable[[], CriterionResult]]] = [
        ("1", lambda: check_orthogonality(tol, data_dir)),
        ("2", lambda: _protocol_campaign("2", "Teleportation", "teleport", trials, seed, campaign, tol)),
        ("3", lambda: check_qis1(trials, seed, campaign, tol, data_dir)),
        ("4", lambda: check_qis2(trials, seed, campaign, tol, data_dir)),
        ("5", lambda: check_dense_coding(tol)),
        ("6", lambda: check_rsp(seed, tol)),
        ("7", lambda: check_security(trials, seed)),
        ("8", lambda: check_impossibility(tol)),
        ("9", lambda: check_no_signaling(seed, tol)),
        ("T", lambda: check_table_data(data_dir, tol)),
    ]
    results = []
    started = time.perf_counter()
    for criterion, check in checks:
        t0 = time.perf_counter()
        result = check()
        results.append(CriterionResult(result.criterion, result.title, result.passed, result.message,
                                       result.details, time.perf_counter() - t0))
        logger.info("criterion %s: %s (%.2fs)", criterion, "pass" if result.passed else "FAIL", results[-1].elapsed)

    total = time.perf_counter() - started
    results.append(CriterionResult(
        "10", "Full report runtime", total < 60.0,
        "all criteria completed within 60 s" if total < 60.0 else "criteria took longer than 60 s",
        {"limit_seconds": 60},
        total,
    ))
    return results
