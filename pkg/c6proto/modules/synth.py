"""
Synthesis Module
Receiver corrections per measurement outcome, basis completion, and the
search for qubit layouts under which a table's printed rows reproduce.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from ..errors import BasisError, SynthesisError
from .measure import MeasurementBasis, check_orthonormal
from .qstate import Ket, Label, SecretState, fidelity_up_to_phase, permute
from .tables import (
    INPUT_LABELS,
    Layout,
    PartyAssignment,
    ProtocolTable,
    TableOracle,
    ValidationReport,
    validate_table,
)

logger = logging.getLogger(__name__)

SQRT_HALF = 1.0 / np.sqrt(2.0)
GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
}
CZ = np.diag([1, 1, 1, -1]).astype(complex)


def _permutation(mapping: Sequence[int]) -> np.ndarray:
    """Matrix sending basis state i to basis state mapping[i]."""
    mat = np.zeros((4, 4), dtype=complex)
    for src, dst in enumerate(mapping):
        mat[dst, src] = 1.0
    return mat


_SWAP = _permutation([0, 2, 1, 3])
_CX12 = _permutation([0, 1, 3, 2])
_CX21 = _permutation([0, 3, 2, 1])
# Linear reversible maps on two qubits, applied before the local factors.
LINEAR = {
    "I": np.eye(4, dtype=complex),
    "SWAP": _SWAP,
    "CX12": _CX12,
    "CX21": _CX21,
    "CX12*CX21": _CX12 @ _CX21,
    "CX21*CX12": _CX21 @ _CX12,
}
QUARTER_TURNS = (1 + 0j, 1j, -1 + 0j, -1j)
PHASE_NAMES = {1 + 0j: "", 1j: "i", -1 + 0j: "-1", -1j: "-i"}


def word_matrix(word: str) -> np.ndarray:
    """Product of single-qubit gates read left to right as matrices."""
    mat = np.eye(2, dtype=complex)
    for letter in word:
        if letter not in GATES:
            raise SynthesisError(f"Unknown gate {letter!r} in word {word!r}")
        mat = mat @ GATES[letter]
    return mat


@dataclass(frozen=True)
class LocalOp:
    """phase * CZ^cz * (F1 (x) F2) * L on a receiver's two qubits."""

    qubits: Tuple[Label, Label]
    factors: Tuple[str, str] = ("I", "I")
    linear: str = "I"
    cz: bool = False
    phase: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.qubits) != 2 or len(self.factors) != 2:
            raise SynthesisError(f"Corrections act on two qubits, got {self.qubits}")
        if self.linear not in LINEAR:
            raise SynthesisError(f"Unknown linear map {self.linear!r}")
        mat = self.matrix()
        if not np.allclose(mat.conj().T @ mat, np.eye(4), atol=config.ALGEBRA_TOL):
            raise SynthesisError(f"Correction {self.describe()} is not unitary")

    def matrix(self) -> np.ndarray:
        local = np.kron(word_matrix(self.factors[0]), word_matrix(self.factors[1]))
        mat = local @ LINEAR[self.linear]
        if self.cz:
            mat = CZ @ mat
        return self.phase * mat

    def describe(self) -> str:
        parts = []
        name = PHASE_NAMES.get(complex(self.phase))
        if name is None:
            parts.append(f"exp({np.angle(self.phase):.6f}i)")
        elif name:
            parts.append(name)
        if self.cz:
            parts.append("CZ")
        if self.factors != ("I", "I"):
            parts.append(f"{self.factors[0]}⊗{self.factors[1]}")
        if self.linear != "I":
            parts.append(self.linear)
        return " · ".join(parts) or "I"

    def apply(self, ket: Ket) -> Ket:
        if ket.labels == self.qubits:
            return Ket(self.matrix() @ ket.amplitudes, ket.labels)
        if set(ket.labels) != set(self.qubits):
            raise SynthesisError(f"Correction on {self.qubits} cannot act on register {ket.labels}")
        return permute(self.apply(permute(ket, self.qubits)), ket.labels)

    def to_dict(self) -> Dict:
        return {"qubits": [str(q) for q in self.qubits], "operator": self.describe()}


@lru_cache(maxsize=None)
def _words(alphabet: str, max_len: int) -> Tuple[Tuple[str, np.ndarray], ...]:
    """Distinct gate words up to global phase, shortest first."""
    seen, out = set(), []
    for length in range(max_len + 1):
        for letters in itertools.product(alphabet, repeat=length):
            word = "".join(letters) or "I"
            mat = word_matrix(word)
            pivot = mat.flat[int(np.argmax(np.abs(mat) > 1e-9))]
            key = np.round(mat / (pivot / abs(pivot)), 8).tobytes()
            if key not in seen:
                seen.add(key)
                out.append((word, mat))
    return tuple(out)


# (name, word alphabet, word length, controlled-phase options, linear maps)
STAGES = (
    ("pauli", "XYZ", 1, (False,), ("I",)),
    ("controlled-phase", "XYZ", 1, (False, True), ("I",)),
    ("swap", "XYZ", 1, (False, True), ("I", "SWAP")),
    ("linear", "XYZ", 1, (False, True), tuple(LINEAR)),
    ("local-clifford", "XYZHS", 3, (False, True), ("I", "SWAP")),
)

KetSource = Union[Ket, Callable[[SecretState], Ket]]


def _columns(source: KetSource, payloads: Sequence[SecretState]) -> Tuple[np.ndarray, Tuple[Label, ...]]:
    if isinstance(source, Ket):
        return source.amplitudes[:, None], source.labels
    kets = [source(p) for p in payloads]
    return np.stack([k.amplitudes for k in kets], axis=1), kets[0].labels


def _candidates(stage, residual: np.ndarray, target: np.ndarray,
                tol: float) -> Iterator[Tuple[str, bool, str, str, complex]]:
    """Operators of one stage whose normalized overlap with the target map passes."""
    _, alphabet, max_len, cz_options, linears = stage
    words = _words(alphabet, max_len)
    mats = np.stack([m for _, m in words])
    n = residual.shape[1]
    norm = np.linalg.norm(residual) * np.linalg.norm(target)
    tgt = target.reshape(2, 2, n).conj()
    cz_sign = np.array([[1, 1], [1, -1]], dtype=complex)[:, :, None]
    hits = []
    for lin_index, lname in enumerate(linears):
        moved = (LINEAR[lname] @ residual).reshape(2, 2, n)
        local = np.einsum("iab,jcd,bdn->ijacn", mats, mats, moved)
        for cz in cz_options:
            out = local * cz_sign if cz else local
            overlap = np.einsum("acn,ijacn->ij", tgt, out) / norm
            for i, j in zip(*np.nonzero(np.abs(overlap) >= 1.0 - tol)):
                size = len(words[i][0].strip("I")) + len(words[j][0].strip("I"))
                hits.append((size, lin_index, cz, int(i), int(j), overlap[i, j], lname))
    hits.sort(key=lambda h: h[:5])
    for _, _, cz, i, j, overlap, lname in hits:
        yield lname, cz, words[i][0], words[j][0], overlap


def _quarter_turn(overlap: complex) -> complex:
    want = np.conj(overlap) / abs(overlap)
    nearest = min(QUARTER_TURNS, key=lambda q: abs(q - want))
    return nearest if abs(nearest - want) <= 1e-6 else complex(want)


def synthesize_correction(residual: KetSource, target: KetSource,
                          fit_payloads: Optional[Sequence[SecretState]] = None,
                          check_payloads: Optional[Sequence[SecretState]] = None,
                          rng: Optional[np.random.Generator] = None,
                          tol: float = config.EIGEN_TOL) -> LocalOp:
    """Smallest operator from the correction menu that maps residual to target.

    `residual` and `target` are kets, or functions from a payload to a ket. For
    functions the operator is solved on `fit_payloads` (the four basis payloads
    by default) as one map with a common phase, then confirmed payload by
    payload on `check_payloads` (Haar-random by default).
    """
    if fit_payloads is None:
        fit_payloads = [SecretState.basis(k) for k in range(4)]
    callable_input = not (isinstance(residual, Ket) and isinstance(target, Ket))
    if check_payloads is None:
        if callable_input:
            rng = rng if rng is not None else np.random.default_rng(config.DEFAULT_SEED)
            check_payloads = [SecretState.random(rng) for _ in range(config.RANDOM_PAYLOADS)]
        else:
            check_payloads = []

    res_cols, labels = _columns(residual, fit_payloads)
    tgt_cols, _ = _columns(target, fit_payloads)
    if res_cols.shape != tgt_cols.shape:
        raise SynthesisError(f"Residual and target differ in shape: {res_cols.shape} vs {tgt_cols.shape}")
    if res_cols.shape[0] != 4:
        raise SynthesisError(f"Corrections act on two qubits, residual has {len(labels)}")
    if np.linalg.norm(res_cols) <= config.ALGEBRA_TOL:
        raise SynthesisError("Residual vanishes; nothing to correct")

    for stage in STAGES:
        for lname, cz, first, second, overlap in _candidates(stage, res_cols, tgt_cols, tol):
            op = LocalOp(labels, (first, second), lname, cz, _quarter_turn(overlap))
            if _confirm(op, residual, target, check_payloads, tol):
                logger.debug("correction on %s: %s (stage %s)", labels, op.describe(), stage[0])
                return op
    raise SynthesisError("No operator in the correction menu maps the residual to the target")


def _confirm(op: LocalOp, residual: KetSource, target: KetSource,
             payloads: Sequence[SecretState], tol: float) -> bool:
    for payload in payloads:
        res = residual(payload) if callable(residual) else residual
        tgt = target(payload) if callable(target) else target
        if fidelity_up_to_phase(op.apply(res.normalized()), tgt.normalized()) < 1.0 - tol:
            return False
    return True


def complete_basis(partial: Sequence[Ket], dim: int, targets: Optional[Sequence[Label]] = None,
                   name: str = "", tol: float = config.EIGEN_TOL) -> MeasurementBasis:
    """Extend orthonormal vectors to a full basis by Gram-Schmidt over |0>, |1>, ...

    The added vectors follow the listed ones and are deterministic given the input.
    """
    n_qubits = int(round(np.log2(dim)))
    if 2 ** n_qubits != dim:
        raise BasisError(f"Invalid dimension {dim}: not a power of two")
    if targets is None:
        targets = partial[0].labels if partial else tuple(range(1, n_qubits + 1))
    vectors = [k.amplitudes.copy() for k in partial]
    if any(v.size != dim for v in vectors):
        raise BasisError(f"Basis {name!r}: vectors do not have dimension {dim}")
    if vectors:
        listed = MeasurementBasis(tuple(targets), np.vstack(vectors), name)
        report = check_orthonormal(listed, tol)
        if not report.passed:
            raise BasisError(
                f"Basis {name!r} is not orthonormal: off-diagonal {report.max_off_diagonal:.3e} "
                f"at {report.worst_pair}"
            )

    basis = list(vectors)
    for index in range(dim):
        if len(basis) == dim:
            break
        vec = np.zeros(dim, dtype=complex)
        vec[index] = 1.0
        for _ in range(2):
            for b in basis:
                vec = vec - np.vdot(b, vec) * b
        norm = np.linalg.norm(vec)
        if norm > 1e-8:
            basis.append(vec / norm)
    return MeasurementBasis(tuple(targets), np.vstack(basis), name, listed=len(vectors))


@dataclass(frozen=True)
class AssignmentReport:
    table_id: str
    layout: Layout
    score: int
    rows: int
    verdict: str
    candidates: int
    validation: ValidationReport
    stated_layout: Optional[Layout] = None
    stated_score: Optional[int] = None

    @property
    def matched_rows(self) -> List[int]:
        return [r.row for r in self.validation.rows if r.matched]

    @property
    def near_misses(self) -> Dict[int, Tuple[str, ...]]:
        return {r.row: r.diagnosis for r in self.validation.rows if not r.matched and r.diagnosis}

    @property
    def details(self) -> List[Dict]:
        return [r.to_dict() for r in self.validation.rows if not r.matched]

    def to_dict(self) -> Dict:
        out = {
            "table": self.table_id,
            "verdict": self.verdict,
            "layout": self.layout.to_dict(),
            "score": self.score,
            "rows": self.rows,
            "matched_rows": self.matched_rows,
            "candidates": self.candidates,
            "mismatches": self.details,
            "near_misses": {str(k): list(v) for k, v in self.near_misses.items()},
        }
        if self.stated_layout is not None:
            out["stated"] = {"layout": self.stated_layout.to_dict(), "score": self.stated_score}
        return out


def _agreement(layout: Layout, stated: Optional[PartyAssignment]) -> int:
    """Number of non-input qubits held by the same party as stated."""
    if stated is None:
        return 0
    held = layout.assignment
    return sum(
        1 for label in held.all_labels()
        if label not in INPUT_LABELS and held.party_of(label) == stated.party_of(label)
    )


def _measured_orders(labels: Sequence[Label], width: int) -> Iterator[Tuple[Label, ...]]:
    required = tuple(label for label in labels if label in INPUT_LABELS)
    optional = tuple(label for label in labels if label not in INPUT_LABELS)
    if len(required) > width:
        return
    for chosen in itertools.combinations(optional, width - len(required)):
        yield from itertools.permutations(required + chosen)


def infer_assignment(table: ProtocolTable, channel: Optional[Ket] = None,
                     stated: Optional[PartyAssignment] = None,
                     source_table: Optional[ProtocolTable] = None,
                     tol: float = config.EIGEN_TOL) -> AssignmentReport:
    """Exhaustive layout search scored by rows reproduced.

    Candidates cover which qubits the measuring party holds, the order its
    kets read them (payload qubits included), and the print order of the rest.
    Ties go to agreement with the stated split, then to the lexicographically
    smallest encoding.
    """
    oracle = TableOracle(table, channel, source_table)
    stated = stated or table.stated
    if stated is not None:
        measurer = stated.measurer
        receivers = [(name, len(labels)) for name, labels in stated.parties[1:]]
    else:
        measurer, receivers = "alice", [("bob", table.result_width)]

    best_key, best_layout, count = None, None, 0
    for measured in _measured_orders(oracle.labels, table.width):
        residuals, rest = oracle.residuals(measured)
        for printed in itertools.permutations(rest):
            count += 1
            cos = oracle.cosines(TableOracle.reorder(residuals, rest, printed))
            score = int(np.sum(np.abs(cos) >= 1.0 - tol))
            layout = Layout.from_orders(measured, printed, receivers, measurer)
            key = (-score, -_agreement(layout, stated), layout.encoding())
            if best_key is None or key < best_key:
                best_key, best_layout = key, layout
    if best_layout is None:
        raise SynthesisError(f"Table {table.table_id}: no candidate layouts for {oracle.labels}")

    stated_layout, stated_score = None, None
    if stated is not None:
        stated_layout = Layout.from_assignment(stated)
        stated_score = oracle.score(stated_layout, tol)

    score = -best_key[0]
    validation = validate_table(table, channel, best_layout, label="inferred", tol=tol, oracle=oracle)
    if score < len(table.rows):
        verdict = "inconsistent"
    elif stated_score == len(table.rows):
        verdict = "consistent"
    else:
        verdict = "repaired"
    logger.info("table %s: best layout %s matches %d/%d (%d candidates)",
                table.table_id, " ".join(best_layout.encoding()), score, len(table.rows), count)
    return AssignmentReport(table.table_id, best_layout, score, len(table.rows), verdict, count,
                            validation, stated_layout, stated_score)
