"""
Protocol Tables Module
Parse the bundled measurement tables and check every printed row against a
state-vector oracle.

Table file grammar (UTF-8, one statement per line, ``#`` starts a comment)::

    table <id> width <int>
    source <table-id>:<row>
    stated <party>=<label,label,...> [<party>=<labels> ...]
    erratum <row> <text>
    <term> [<term> ...] => <term> [<term> ...]

    term  := sign coeff ":" bitstring
    sign  := "+" | "-"
    coeff := "1" | "a" | "m" | "g" | "b" | "a*" | "m*" | "g*" | "b*"

``a m g b`` stand for the payload amplitudes alpha, mu, gamma, beta in the
canonical order |00>, |01>, |10>, |11>. A ``*`` marks complex conjugation.
"""
from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

import config
from ..errors import (
    LabelError,
    ProtocolError,
    StateError,
    TableSyntaxError,
    TableWidthError,
    UnknownSymbolError,
)
from .measure import GramReport, MeasurementBasis, check_orthonormal
from .qstate import Ket, Label, SecretState, c6

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parents[1] / "data"
HASH_FILE = "SHA256SUMS"
TABLE_SUFFIX = ".qt"

INPUT_LABELS = ("a", "b")
PAYLOAD_SYMBOLS = ("a", "m", "g", "b")
SYMBOLS = ("1",) + PAYLOAD_SYMBOLS + tuple(f"{s}*" for s in PAYLOAD_SYMBOLS)
SYMBOL_NAMES = {"a": "alpha", "m": "mu", "g": "gamma", "b": "beta"}

_TERM_RE = re.compile(r"^(?P<sign>[+-])(?P<coeff>[^:]+):(?P<bits>.*)$")
_TOKEN_RE = re.compile(r"\S+")


def _parse_label(text: str) -> Label:
    return int(text) if text.isdigit() else text


def _label_text(label: Label) -> str:
    return str(label)


@dataclass(frozen=True)
class PartyAssignment:
    """Ordered parties and the qubits each one holds.

    The first party is the measuring party; its labels are listed in the order
    its measurement kets read them.
    """

    parties: Tuple[Tuple[str, Tuple[Label, ...]], ...]

    def __post_init__(self):
        parties = tuple((str(name), tuple(labels)) for name, labels in self.parties)
        if not parties:
            raise LabelError("Invalid assignment: no parties")
        names = [name for name, _ in parties]
        if len(set(names)) != len(names):
            raise LabelError(f"Invalid assignment: duplicate party in {names}")
        flat = [label for _, labels in parties for label in labels]
        if len(set(flat)) != len(flat):
            raise LabelError(f"Invalid assignment: a qubit is held by two parties {flat}")
        if any(not labels for _, labels in parties):
            raise LabelError("Invalid assignment: party without qubits")
        object.__setattr__(self, "parties", parties)

    @classmethod
    def parse(cls, spec: str) -> "PartyAssignment":
        """Read ``alice=a,b,1,6 bob=3,5 charlie=2,4``."""
        parties = []
        for chunk in spec.split():
            name, sep, labels = chunk.partition("=")
            if not sep or not name or not labels:
                raise LabelError(f"Invalid party spec: {chunk!r}")
            parties.append((name, tuple(_parse_label(t) for t in labels.split(",") if t)))
        return cls(tuple(parties))

    @property
    def measurer(self) -> str:
        return self.parties[0][0]

    def labels(self, party: str) -> Tuple[Label, ...]:
        for name, labels in self.parties:
            if name == party:
                return labels
        raise LabelError(f"Unknown party: {party!r}")

    def party_of(self, label: Label) -> Optional[str]:
        for name, labels in self.parties:
            if label in labels:
                return name
        return None

    def all_labels(self) -> Tuple[Label, ...]:
        return tuple(label for _, labels in self.parties for label in labels)

    def spec(self) -> str:
        return " ".join(f"{name}={','.join(map(_label_text, labels))}" for name, labels in self.parties)

    def to_dict(self) -> Dict[str, List[str]]:
        return {name: [_label_text(label) for label in labels] for name, labels in self.parties}


@dataclass(frozen=True)
class Layout:
    """A party assignment plus the order in which receivers' states are printed."""

    assignment: PartyAssignment
    printed: Tuple[Label, ...]

    def __post_init__(self):
        printed = tuple(self.printed)
        receivers = [label for _, labels in self.assignment.parties[1:] for label in labels]
        if sorted(map(_label_text, printed)) != sorted(map(_label_text, receivers)):
            raise LabelError(f"Print order {printed} does not cover the receivers' qubits {receivers}")
        object.__setattr__(self, "printed", printed)

    @classmethod
    def from_assignment(cls, assignment: PartyAssignment) -> "Layout":
        """Receivers printed party by party in the listed order."""
        return cls(assignment, tuple(label for _, labels in assignment.parties[1:] for label in labels))

    @classmethod
    def from_orders(cls, measured: Sequence[Label], printed: Sequence[Label],
                    receivers: Sequence[Tuple[str, int]], measurer: str = "alice") -> "Layout":
        """Split `printed` into consecutive receiver blocks of the given sizes."""
        parties, pos = [(measurer, tuple(measured))], 0
        for name, size in receivers:
            parties.append((name, tuple(printed[pos:pos + size])))
            pos += size
        return cls(PartyAssignment(tuple(parties)), tuple(printed))

    @property
    def measured(self) -> Tuple[Label, ...]:
        return self.assignment.parties[0][1]

    def receivers(self) -> Tuple[Tuple[str, Tuple[Label, ...]], ...]:
        return self.assignment.parties[1:]

    def encoding(self) -> Tuple[str, ...]:
        return tuple(map(_label_text, self.measured)) + ("|",) + tuple(map(_label_text, self.printed))

    def to_dict(self) -> Dict:
        return {
            "parties": self.assignment.to_dict(),
            "measured_order": [_label_text(label) for label in self.measured],
            "print_order": [_label_text(label) for label in self.printed],
        }


@dataclass(frozen=True)
class Term:
    sign: int
    symbol: str
    bits: str

    def text(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}{self.symbol}:{self.bits}"

    @property
    def conjugated(self) -> bool:
        return self.symbol.endswith("*")

    def value(self, secret: Optional[SecretState] = None) -> complex:
        if self.symbol == "1":
            return complex(self.sign)
        if secret is None:
            raise StateError(f"Term {self.text()} needs a secret to be instantiated")
        amp = secret.vector[PAYLOAD_SYMBOLS.index(self.symbol.rstrip("*"))]
        return self.sign * (np.conj(amp) if self.conjugated else amp)


@dataclass(frozen=True)
class Row:
    index: int
    outcome: Tuple[Term, ...]
    result: Tuple[Term, ...]
    line: int = field(default=0, compare=False)

    def text(self) -> str:
        return " ".join(t.text() for t in self.outcome) + " => " + " ".join(t.text() for t in self.result)


def _terms_vector(terms: Sequence[Term], width: int, secret: Optional[SecretState]) -> np.ndarray:
    vec = np.zeros(2 ** width, dtype=complex)
    for term in terms:
        vec[int(term.bits, 2) if width else 0] += term.value(secret)
    return vec


@dataclass(frozen=True)
class ProtocolTable:
    """One measurement table as printed, typos included."""

    table_id: str
    width: int
    rows: Tuple[Row, ...]
    source: Optional[Tuple[str, int]] = None
    stated: Optional[PartyAssignment] = None
    errata: Tuple[Tuple[int, str], ...] = ()
    path: Optional[str] = field(default=None, compare=False)

    @property
    def result_width(self) -> int:
        return len(self.rows[0].result[0].bits)

    @property
    def symbols(self) -> frozenset:
        return frozenset(t.symbol for row in self.rows for t in row.outcome + row.result)

    @property
    def is_linear(self) -> bool:
        """Outcome kets are constant and results are linear in the payload."""
        return all(t.symbol == "1" for row in self.rows for t in row.outcome) and all(
            t.symbol in PAYLOAD_SYMBOLS for row in self.rows for t in row.result
        )

    def errata_map(self) -> Dict[int, str]:
        return dict(self.errata)

    def row(self, index: int) -> Row:
        if not 1 <= index <= len(self.rows):
            raise IndexError(f"Table {self.table_id} has no row {index}")
        return self.rows[index - 1]

    def outcome_vector(self, row: Row, secret: Optional[SecretState] = None) -> np.ndarray:
        """Normalized measurement vector of `row`."""
        vec = _terms_vector(row.outcome, self.width, secret)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise StateError(f"Table {self.table_id} row {row.index}: outcome ket vanishes")
        return vec / norm

    def outcome_matrix(self, secret: Optional[SecretState] = None) -> np.ndarray:
        return np.vstack([self.outcome_vector(row, secret) for row in self.rows])

    def result_vector(self, row: Row, secret: SecretState) -> np.ndarray:
        return _terms_vector(row.result, self.result_width, secret)

    def printed_map(self, row: Row) -> np.ndarray:
        """Printed result as a (4, 2^r) map from payload basis states to kets."""
        out = np.zeros((4, 2 ** self.result_width), dtype=complex)
        for term in row.result:
            if term.symbol not in PAYLOAD_SYMBOLS:
                raise StateError(f"Table {self.table_id} row {row.index}: result is not linear in the payload")
            out[PAYLOAD_SYMBOLS.index(term.symbol), int(term.bits, 2)] += term.sign
        return out

    def measurement_basis(self, targets: Optional[Sequence[Label]] = None,
                          secret: Optional[SecretState] = None) -> MeasurementBasis:
        """The printed outcome kets as listed (not completed) basis vectors."""
        targets = tuple(targets) if targets is not None else tuple(range(1, self.width + 1))
        if len(targets) != self.width:
            raise LabelError(f"Table {self.table_id} measures {self.width} qubits, got targets {targets}")
        return MeasurementBasis(targets, self.outcome_matrix(secret), name=f"table{self.table_id}")


def _error(cls, message: str, line: int, column: int, source: Optional[str]):
    return cls(message, line, column, source)


def _parse_term(token: str, line: int, column: int, source: Optional[str]) -> Term:
    match = _TERM_RE.match(token)
    if not match:
        raise _error(TableSyntaxError, f"malformed term {token!r}", line, column, source)
    coeff, bits = match.group("coeff"), match.group("bits")
    if coeff not in SYMBOLS:
        raise _error(UnknownSymbolError, f"unknown coefficient {coeff!r}", line, column + 1, source)
    if not bits or set(bits) - {"0", "1"}:
        raise _error(TableSyntaxError, f"invalid bitstring {bits!r}", line, column + len(coeff) + 2, source)
    return Term(1 if match.group("sign") == "+" else -1, coeff, bits)


def parse_table(text: str, source: Optional[str] = None) -> ProtocolTable:
    """Parse table text; errors carry the 1-based line and column."""
    header: Optional[Tuple[str, int]] = None
    table_source: Optional[Tuple[str, int]] = None
    stated: Optional[PartyAssignment] = None
    errata: List[Tuple[int, str, int]] = []
    rows: List[Row] = []
    result_width: Optional[int] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(content)]
        if not tokens:
            continue
        keyword, col = tokens[0]

        if keyword == "table":
            if header is not None:
                raise _error(TableSyntaxError, "duplicate table header", lineno, col, source)
            if len(tokens) != 4 or tokens[2][0] != "width" or not tokens[3][0].isdigit():
                raise _error(TableSyntaxError, "expected 'table <id> width <int>'", lineno, col, source)
            header = (tokens[1][0], int(tokens[3][0]))
            if header[1] < 1:
                raise _error(TableSyntaxError, "width must be positive", lineno, tokens[3][1], source)
            continue

        if header is None:
            raise _error(TableSyntaxError, "missing table header", lineno, col, source)

        if keyword == "source":
            ref = tokens[1][0] if len(tokens) == 2 else ""
            table_id, sep, row_no = ref.partition(":")
            if not sep or not table_id or not row_no.isdigit():
                raise _error(TableSyntaxError, "expected 'source <table-id>:<row>'", lineno, col, source)
            table_source = (table_id, int(row_no))
        elif keyword == "stated":
            if len(tokens) < 2:
                raise _error(TableSyntaxError, "expected 'stated <party>=<labels> ...'", lineno, col, source)
            try:
                stated = PartyAssignment.parse(" ".join(tok for tok, _ in tokens[1:]))
            except LabelError as exc:
                raise _error(TableSyntaxError, str(exc), lineno, tokens[1][1], source) from exc
        elif keyword == "erratum":
            if len(tokens) < 3 or not tokens[1][0].isdigit():
                raise _error(TableSyntaxError, "expected 'erratum <row> <text>'", lineno, col, source)
            note = content[tokens[2][1] - 1:].strip()
            errata.append((int(tokens[1][0]), note, lineno))
        else:
            arrows = [i for i, (tok, _) in enumerate(tokens) if tok == "=>"]
            if len(arrows) != 1:
                raise _error(TableSyntaxError, "row needs exactly one '=>'", lineno, col, source)
            split = arrows[0]
            if split == 0 or split == len(tokens) - 1:
                raise _error(TableSyntaxError, "row needs terms on both sides of '=>'",
                             lineno, tokens[split][1], source)
            outcome = tuple(_parse_term(tok, lineno, c, source) for tok, c in tokens[:split])
            result = tuple(_parse_term(tok, lineno, c, source) for tok, c in tokens[split + 1:])
            for term, (_, c) in zip(outcome, tokens[:split]):
                if len(term.bits) != header[1]:
                    raise _error(TableWidthError, f"outcome term {term.text()} is not {header[1]} bits wide",
                                 lineno, c, source)
            for term, (_, c) in zip(result, tokens[split + 1:]):
                if result_width is None:
                    result_width = len(term.bits)
                if len(term.bits) != result_width:
                    raise _error(TableWidthError, f"result term {term.text()} is not {result_width} bits wide",
                                 lineno, c, source)
            rows.append(Row(len(rows) + 1, outcome, result, lineno))

    if header is None:
        raise _error(TableSyntaxError, "missing table header", 1, 1, source)
    if not rows:
        raise _error(TableSyntaxError, "table has no rows", max(1, len(text.splitlines())), 1, source)
    for row_no, _, lineno in errata:
        if not 1 <= row_no <= len(rows):
            raise _error(TableSyntaxError, f"erratum refers to missing row {row_no}", lineno, 1, source)

    table = ProtocolTable(
        table_id=header[0],
        width=header[1],
        rows=tuple(rows),
        source=table_source,
        stated=stated,
        errata=tuple((row_no, note) for row_no, note, _ in errata),
        path=source,
    )
    logger.debug("parsed table %s: %d rows, symbols %s", table.table_id, len(rows), sorted(table.symbols))
    return table


def serialize_table(table: ProtocolTable) -> str:
    lines = [f"table {table.table_id} width {table.width}"]
    if table.source:
        lines.append(f"source {table.source[0]}:{table.source[1]}")
    if table.stated:
        lines.append(f"stated {table.stated.spec()}")
    lines.extend(f"erratum {row_no} {note}" for row_no, note in table.errata)
    lines.extend(row.text() for row in table.rows)
    return "\n".join(lines) + "\n"


def _table_file(name: str, data_dir: Path) -> Path:
    stem = name if name.startswith("table") else f"table{name}"
    return data_dir / (stem if stem.endswith(TABLE_SUFFIX) else stem + TABLE_SUFFIX)


def load_table(name_or_path: Union[str, Path], data_dir: Optional[Union[str, Path]] = None) -> ProtocolTable:
    """Load a table by file path or by bundled name (``table1``, ``1``)."""
    path = Path(name_or_path)
    if not path.is_file():
        path = _table_file(str(name_or_path), Path(data_dir) if data_dir else DATA_DIR)
    if not path.is_file():
        raise FileNotFoundError(f"Table not found: {name_or_path}")
    text = path.read_text(encoding=config.OUTPUT_ENCODING)
    return parse_table(text, source=str(path))


def load_source_table(table: ProtocolTable) -> Optional[ProtocolTable]:
    """The table whose row `table` measures, looked up beside `table`'s file."""
    if table.source is None:
        return None
    data_dir = Path(table.path).parent if table.path else DATA_DIR
    return load_table(table.source[0], data_dir)


def available_tables(data_dir: Optional[Union[str, Path]] = None) -> List[str]:
    data_dir = Path(data_dir) if data_dir else DATA_DIR
    return sorted(p.stem for p in data_dir.glob(f"*{TABLE_SUFFIX}"))


def verify_data_hashes(data_dir: Optional[Union[str, Path]] = None) -> Dict[str, bool]:
    """Compare every table file with its recorded SHA-256 digest."""
    data_dir = Path(data_dir) if data_dir else DATA_DIR
    expected: Dict[str, str] = {}
    hash_path = data_dir / HASH_FILE
    if hash_path.is_file():
        for line in hash_path.read_text(encoding=config.OUTPUT_ENCODING).splitlines():
            parts = line.split()
            if len(parts) == 2:
                expected[parts[1].lstrip("*")] = parts[0].lower()
    status = {}
    for path in sorted(data_dir.glob(f"*{TABLE_SUFFIX}")):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        status[path.name] = expected.get(path.name) == digest
    return status


def phase_family_payloads(count: int = config.RSP_PHI_GRID) -> List[SecretState]:
    return [SecretState.phase_family(2.0 * np.pi * i / count) for i in range(count)]


def _row_cosines(printed: np.ndarray, residuals: np.ndarray, linear: bool) -> np.ndarray:
    """Normalized overlap <printed, residual> per row.

    Linear tables compare the whole payload map at once, so the phase must be
    common to every payload. Otherwise each payload is compared on its own and
    the worst one is kept.
    """
    if linear:
        num = np.einsum("okr,okr->o", printed.conj(), residuals)
        den = np.linalg.norm(printed.reshape(len(printed), -1), axis=1) * np.linalg.norm(
            residuals.reshape(len(residuals), -1), axis=1
        )
        return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    num = np.einsum("okr,okr->ok", printed.conj(), residuals)
    den = np.linalg.norm(printed, axis=2) * np.linalg.norm(residuals, axis=2)
    cos = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    worst = np.argmin(np.abs(cos), axis=1)
    return cos[np.arange(len(cos)), worst]


class TableOracle:
    """Simulated residuals for every row of a table under any qubit layout.

    The joint state is the payload on ("a", "b") tensored with the channel, the
    bare channel for tables whose outcome kets carry the secret, or the printed
    result of another table's row for tables with a ``source`` directive.
    """

    def __init__(self, table: ProtocolTable, channel: Optional[Ket] = None,
                 source_table: Optional[ProtocolTable] = None,
                 payloads: Optional[Sequence[SecretState]] = None):
        channel = channel if channel is not None else c6()
        self.table = table
        self.linear = table.is_linear
        self.payloads = list(payloads) if payloads is not None else (
            [SecretState.basis(k) for k in range(4)] if self.linear else phase_family_payloads()
        )
        n_total = table.width + table.result_width

        if table.source is not None:
            source_table = source_table or load_source_table(table)
            if not (self.linear and source_table.is_linear):
                raise ProtocolError(f"Table {table.table_id}: sourced tables must be linear")
            src_map = source_table.printed_map(source_table.row(table.source[1]))
            if src_map.shape[1] != 2 ** n_total:
                raise StateError(
                    f"Table {table.table_id} spans {n_total} qubits, source row has {source_table.result_width}"
                )
            self.labels: Tuple[Label, ...] = tuple(range(1, n_total + 1))
            joint = src_map / max(float(np.max(np.linalg.norm(src_map, axis=1))), config.ALGEBRA_TOL)
        elif n_total == channel.n_qubits + 2:
            self.labels = INPUT_LABELS + channel.labels
            joint = np.vstack([np.kron(p.vector, channel.amplitudes) for p in self.payloads])
        elif n_total == channel.n_qubits:
            self.labels = channel.labels
            joint = np.tile(channel.amplitudes, (len(self.payloads), 1))
        else:
            raise StateError(
                f"Table {table.table_id} spans {n_total} qubits; channel has {channel.n_qubits}"
            )

        self.joint = joint
        if self.linear:
            outcomes = table.outcome_matrix()
            self.outcomes = np.broadcast_to(outcomes, (len(self.joint),) + outcomes.shape)
            self.printed = np.stack([table.printed_map(row) for row in table.rows])
        else:
            self.outcomes = np.stack([table.outcome_matrix(p) for p in self.payloads])
            self.printed = np.stack(
                [np.stack([table.result_vector(row, p) for p in self.payloads]) for row in table.rows]
            )

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def check_layout(self, layout: Layout) -> None:
        if len(layout.measured) != self.table.width:
            raise StateError(
                f"Table {self.table.table_id} measures {self.table.width} qubits, layout measures {len(layout.measured)}"
            )
        if sorted(map(_label_text, layout.measured + layout.printed)) != sorted(map(_label_text, self.labels)):
            raise LabelError(f"Layout {layout.encoding()} does not cover register {self.labels}")

    def residuals(self, measured: Sequence[Label], joint: Optional[np.ndarray] = None,
                  outcomes: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Tuple[Label, ...]]:
        """Unnormalized residuals (rows, payloads, 2^r) with the rest in register order."""
        measured = tuple(measured)
        joint = self.joint if joint is None else joint
        outcomes = self.outcomes if outcomes is None else outcomes
        rest = tuple(label for label in self.labels if label not in measured)
        axes = [0] + [1 + self.labels.index(label) for label in measured + rest]
        tensor = joint.reshape((len(joint),) + (2,) * self.n_qubits)
        moved = np.transpose(tensor, axes).reshape(len(joint), 2 ** len(measured), 2 ** len(rest))
        return np.einsum("kom,kmr->okr", outcomes.conj(), moved), rest

    @staticmethod
    def reorder(residuals: np.ndarray, rest: Sequence[Label], printed: Sequence[Label]) -> np.ndarray:
        rest = tuple(rest)
        if tuple(printed) == rest:
            return residuals
        n_rows, n_pay = residuals.shape[:2]
        axes = [0, 1] + [2 + rest.index(label) for label in printed]
        tensor = residuals.reshape((n_rows, n_pay) + (2,) * len(rest))
        return np.transpose(tensor, axes).reshape(n_rows, n_pay, -1)

    def cosines(self, residuals: np.ndarray) -> np.ndarray:
        return _row_cosines(self.printed, residuals, self.linear)

    def layout_residuals(self, layout: Layout) -> np.ndarray:
        self.check_layout(layout)
        res, rest = self.residuals(layout.measured)
        return self.reorder(res, rest, layout.printed)

    def score(self, layout: Layout, tol: float = config.EIGEN_TOL) -> int:
        return int(np.sum(np.abs(self.cosines(self.layout_residuals(layout))) >= 1.0 - tol))


@dataclass(frozen=True)
class RowVerdict:
    row: int
    verdict: str
    distance: float
    phase: float
    probability: float
    diagnosis: Tuple[str, ...] = ()
    erratum: Optional[str] = None
    random_fidelity: Optional[float] = None

    @property
    def matched(self) -> bool:
        return self.verdict in ("match", "phase-match")

    def to_dict(self) -> Dict:
        out = {
            "row": self.row,
            "verdict": self.verdict,
            "distance": self.distance,
            "phase": self.phase,
            "probability": self.probability,
        }
        if self.diagnosis:
            out["diagnosis"] = list(self.diagnosis)
        if self.erratum:
            out["erratum"] = self.erratum
        if self.random_fidelity is not None:
            out["random_payload_fidelity"] = self.random_fidelity
        return out


@dataclass(frozen=True)
class ValidationReport:
    table_id: str
    layout: Layout
    label: str
    mode: str
    rows: Tuple[RowVerdict, ...]

    @property
    def matched(self) -> int:
        return sum(1 for r in self.rows if r.matched)

    @property
    def counts(self) -> Dict[str, int]:
        out = {"match": 0, "phase-match": 0, "mismatch": 0}
        for r in self.rows:
            out[r.verdict] += 1
        return out

    @property
    def mismatched_rows(self) -> List[int]:
        return [r.row for r in self.rows if not r.matched]

    @property
    def undocumented_rows(self) -> List[int]:
        return [r.row for r in self.rows if not r.matched and r.erratum is None]

    @property
    def consistent(self) -> bool:
        return not self.mismatched_rows

    @property
    def explained(self) -> bool:
        """Every mismatch is a documented erratum."""
        return not self.undocumented_rows

    def to_dict(self) -> Dict:
        return {
            "table": self.table_id,
            "assignment": self.label,
            "layout": self.layout.to_dict(),
            "mode": self.mode,
            "summary": dict(self.counts, rows=len(self.rows), matched=self.matched,
                            undocumented=self.undocumented_rows),
            "rows": [r.to_dict() for r in self.rows],
        }


def _diagnose(printed: np.ndarray, oracle: np.ndarray, tol: float) -> Tuple[str, ...]:
    """Per-symbol comparison of a printed payload map with the oracle's.

    The reference scale is the one agreed on by the most symbols, so a single
    wrong entry does not spoil the others.
    """
    ratios = []
    for p_col, m_col in zip(printed, oracle):
        m_norm = float(np.vdot(m_col, m_col).real)
        if m_norm > tol and np.linalg.norm(p_col) > tol:
            ratios.append(np.vdot(m_col, p_col) / m_norm)
    if not ratios:
        return tuple(f"{s}: ket" for s in PAYLOAD_SYMBOLS)

    def agrees(ratio):
        return sum(np.allclose(p, ratio * m, atol=1e-6) for p, m in zip(printed, oracle))

    scale = max(ratios, key=agrees)
    notes = []
    for sym, p_col, m_col in zip(PAYLOAD_SYMBOLS, printed, oracle):
        expected = scale * m_col
        if np.allclose(p_col, expected, atol=1e-6):
            continue
        if np.allclose(p_col, -expected, atol=1e-6):
            notes.append(f"{sym}: sign")
        elif not np.array_equal(np.abs(p_col) > 1e-6, np.abs(expected) > 1e-6):
            notes.append(f"{sym}: ket")
        else:
            notes.append(f"{sym}: amplitude")
    return tuple(notes)


def classify(cos: complex, tol: float) -> Tuple[str, float, float]:
    magnitude = float(abs(cos))
    phase = float(np.angle(cos)) if magnitude > 0.0 else 0.0
    if magnitude >= 1.0 - tol:
        verdict = "match" if abs(phase) <= 1e-6 else "phase-match"
    else:
        verdict = "mismatch"
    return verdict, max(0.0, 1.0 - magnitude), phase


def validate_table(table: ProtocolTable, channel: Optional[Ket], layout: Layout,
                   label: str = "custom", rng: Optional[np.random.Generator] = None,
                   tol: float = config.EIGEN_TOL, source_table: Optional[ProtocolTable] = None,
                   oracle: Optional[TableOracle] = None) -> ValidationReport:
    """Compare each printed row with the simulated residual under `layout`."""
    oracle = oracle or TableOracle(table, channel, source_table)
    residuals = oracle.layout_residuals(layout)
    cosines = oracle.cosines(residuals)
    probabilities = np.mean(np.sum(np.abs(residuals) ** 2, axis=2), axis=1)
    random_fid = _random_payload_fidelities(oracle, layout, rng) if oracle.linear else None
    errata = table.errata_map()

    verdicts = []
    for i, row in enumerate(table.rows):
        verdict, distance, phase = classify(cosines[i], tol)
        diagnosis = () if verdict != "mismatch" or not oracle.linear else _diagnose(
            oracle.printed[i], residuals[i], config.ALGEBRA_TOL
        )
        fid = None if random_fid is None else float(random_fid[i])
        if verdict != "mismatch" and fid is not None and fid < 1.0 - tol:
            raise ProtocolError(
                f"Table {table.table_id} row {row.index} matches on basis payloads "
                f"but not on random payloads (fidelity {fid!r})"
            )
        verdicts.append(RowVerdict(row.index, verdict, distance, phase, float(probabilities[i]),
                                   diagnosis, errata.get(row.index), fid))

    report = ValidationReport(table.table_id, layout, label, "linear" if oracle.linear else "phase-family",
                              tuple(verdicts))
    logger.info("table %s (%s): %d/%d rows match", table.table_id, label, report.matched, len(verdicts))
    return report


def _random_payload_fidelities(oracle: TableOracle, layout: Layout,
                               rng: Optional[np.random.Generator]) -> np.ndarray:
    """Worst per-row fidelity over random payloads, simulated directly."""
    rng = rng if rng is not None else np.random.default_rng(config.DEFAULT_SEED)
    secrets = np.array([SecretState.random(rng).vector for _ in range(config.VALIDATION_RANDOM_PAYLOADS)])
    outcomes = np.broadcast_to(oracle.outcomes[0], (len(secrets),) + oracle.outcomes.shape[1:])
    res, rest = oracle.residuals(layout.measured, joint=secrets @ oracle.joint, outcomes=outcomes)
    res = TableOracle.reorder(res, rest, layout.printed)
    printed = np.einsum("sk,okr->osr", secrets, oracle.printed)
    num = np.abs(np.einsum("osr,osr->os", printed.conj(), res)) ** 2
    den = np.sum(np.abs(printed) ** 2, axis=2) * np.sum(np.abs(res) ** 2, axis=2)
    fid = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
    return np.min(fid, axis=1)


def outcome_gram(table: ProtocolTable, secret: Optional[SecretState] = None,
                 tol: float = config.EIGEN_TOL) -> GramReport:
    """Gram check of the printed outcome kets (secret-dependent tables need a secret)."""
    if secret is None and not table.is_linear:
        secret = SecretState.phase_family(0.0)
    return check_orthonormal(table.measurement_basis(secret=secret), tol)


def iter_tables(names: Optional[Iterable[str]] = None,
                data_dir: Optional[Union[str, Path]] = None) -> List[ProtocolTable]:
    return [load_table(name, data_dir) for name in (names or available_tables(data_dir))]
