"""
Measurement Module
Orthonormal bases, projective measurement with collapse, and expansion of
product decompositions of measurement kets.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

import config
from ..errors import BasisError, DecompositionError, MeasurementError, StateError
from .qstate import Ket, Label, fidelity_up_to_phase, ket_from_terms, split_matrix

logger = logging.getLogger(__name__)

SQRT_HALF = 1.0 / np.sqrt(2.0)

# Bell-state decomposition of the first teleportation measurement ket
TELEPORT_BELL_DECOMPOSITION = (
    "(|psi+>|+> + |psi->|->)(|psi+>|+> + |psi->|->)"
    " + (|psi+>|-> + |psi->|+>)(|psi+>|-> + |psi->|+>)"
    " + (|phi+>|+> - |phi->|->)(|phi+>|+> + |phi->|->)"
    " + (|phi+>|-> - |phi->|+>)(|-phi+>|-> - |phi->|+>)"
)
# GHZ decomposition of the first five-qubit splitting measurement ket
QIS2_GHZ_DECOMPOSITION = (
    "1/2((|000> + |111>)(|00> + |11>) + (|000> - |111>)(|00> - |11>)"
    " + (|011> + |100>)(|01> + |10>) + (|011> - |100>)(|01> - |10>))"
)
# Bell reading given for the first four-qubit splitting measurement ket
QIS1_BELL_NOTE = "1/2(|psi+>|psi-> + |phi+>|phi->)"


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Ordered measurement vectors over `targets`.

    `listed` counts the vectors that came from a table; anything after them
    was added by basis completion.
    """

    targets: Tuple[Label, ...]
    matrix: np.ndarray
    name: str = ""
    listed: Optional[int] = None

    def __post_init__(self):
        targets = tuple(self.targets)
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] == 0:
            raise BasisError(f"Invalid basis {self.name!r}: no vectors")
        if mat.shape[1] != 2 ** len(targets):
            raise BasisError(
                f"Invalid basis {self.name!r}: vectors have dimension {mat.shape[1]}, "
                f"targets need {2 ** len(targets)}"
            )
        if len(set(targets)) != len(targets):
            raise BasisError(f"Invalid basis {self.name!r}: duplicate targets {targets}")
        mat.setflags(write=False)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "listed", mat.shape[0] if self.listed is None else self.listed)

    @classmethod
    def from_kets(cls, kets: Sequence[Ket], targets: Optional[Sequence[Label]] = None,
                  name: str = "", normalize: bool = True) -> "MeasurementBasis":
        if not kets:
            raise BasisError(f"Invalid basis {name!r}: no vectors")
        dims = {k.dim for k in kets}
        if len(dims) != 1:
            raise BasisError(f"Invalid basis {name!r}: mixed vector dimensions {sorted(dims)}")
        rows = [k.normalized().amplitudes if normalize else k.amplitudes for k in kets]
        return cls(tuple(targets) if targets is not None else kets[0].labels, np.vstack(rows), name)

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_full(self) -> bool:
        return len(self) == 2 ** len(self.targets)

    def ket(self, index: int) -> Ket:
        return Ket(self.matrix[index], self.targets)

    def kets(self) -> List[Ket]:
        return [self.ket(i) for i in range(len(self))]

    def is_completion(self, index: int) -> bool:
        return index >= self.listed


@dataclass(frozen=True)
class GramReport:
    max_off_diagonal: float
    max_diagonal_deviation: float
    worst_pair: Tuple[int, int]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_off_diagonal <= self.tol and self.max_diagonal_deviation <= self.tol

    def to_dict(self) -> Dict:
        return {
            "max_off_diagonal": self.max_off_diagonal,
            "max_diagonal_deviation": self.max_diagonal_deviation,
            "worst_pair": list(self.worst_pair),
            "passed": self.passed,
        }


class Outcome(NamedTuple):
    index: int
    residual: Ket
    probability: float


@dataclass(frozen=True)
class BellConvention:
    """Names for the Bell states and the Hadamard pair."""

    name: str
    psi_plus: Ket
    psi_minus: Ket
    phi_plus: Ket
    phi_minus: Ket
    plus: Ket
    minus: Ket

    def __post_init__(self):
        for first, second in ((self.psi_plus, self.psi_minus), (self.phi_plus, self.phi_minus),
                              (self.plus, self.minus)):
            if not (first.is_normalized() and second.is_normalized()):
                raise StateError(f"Bell convention {self.name!r}: unnormalized state")
            if abs(np.vdot(first.amplitudes, second.amplitudes)) > config.ALGEBRA_TOL:
                raise StateError(f"Bell convention {self.name!r}: pair not orthogonal")

    @classmethod
    def standard(cls) -> "BellConvention":
        """psi on |00>,|11> and phi on |01>,|10>."""
        return cls._build("standard", ("00", "11"), ("01", "10"))

    @classmethod
    def swapped(cls) -> "BellConvention":
        """psi on |01>,|10> and phi on |00>,|11>."""
        return cls._build("swapped", ("01", "10"), ("00", "11"))

    @classmethod
    def _build(cls, name: str, psi: Tuple[str, str], phi: Tuple[str, str]) -> "BellConvention":
        def pair(bits, sign):
            return ket_from_terms([(1, bits[0]), (sign, bits[1])], normalize=True)

        return cls(
            name=name,
            psi_plus=pair(psi, 1), psi_minus=pair(psi, -1),
            phi_plus=pair(phi, 1), phi_minus=pair(phi, -1),
            plus=pair(("0", "1"), 1), minus=pair(("0", "1"), -1),
        )

    def named(self) -> Dict[str, Ket]:
        return {
            "psi+": self.psi_plus, "psi-": self.psi_minus,
            "phi+": self.phi_plus, "phi-": self.phi_minus,
            "+": self.plus, "-": self.minus,
        }


def check_orthonormal(basis: MeasurementBasis, tol: float = config.EIGEN_TOL) -> GramReport:
    vecs = basis.matrix
    gram = vecs.conj() @ vecs.T
    diag_dev = float(np.max(np.abs(np.diag(gram) - 1.0)))
    off = np.abs(gram - np.diag(np.diag(gram)))
    worst = np.unravel_index(int(np.argmax(off)), off.shape)
    report = GramReport(float(off[worst]), diag_dev, (int(worst[0]), int(worst[1])), tol)
    logger.debug("gram %s: off=%.3e diag=%.3e", basis.name, report.max_off_diagonal, diag_dev)
    return report


def partial_inner(state: Ket, basis_vector: Ket, targets: Optional[Sequence[Label]] = None) -> Ket:
    """<v|psi> over `targets`, unnormalized; remaining labels keep their order."""
    targets = tuple(targets) if targets is not None else basis_vector.labels
    if basis_vector.dim != 2 ** len(targets):
        raise MeasurementError(
            f"Basis vector over {basis_vector.n_qubits} qubits cannot measure targets {targets}"
        )
    mat, rest = split_matrix(state, targets)
    return Ket(basis_vector.amplitudes.conj() @ mat, rest)


def project(state: Ket, basis_vector: Ket,
            targets: Optional[Sequence[Label]] = None) -> Tuple[float, Optional[Ket]]:
    """Probability of `basis_vector` and the normalized post-measurement state.

    Measured qubits are removed from the register. The residual is None when
    the probability is below the floor.
    """
    if not basis_vector.is_normalized(config.EIGEN_TOL):
        raise MeasurementError("Basis vector is not normalized")
    inner = partial_inner(state, basis_vector, targets)
    prob = float(np.vdot(inner.amplitudes, inner.amplitudes).real)
    if prob <= config.PROBABILITY_FLOOR:
        return prob, None
    return prob, Ket(inner.amplitudes / np.sqrt(prob), inner.labels)


def outcome_amplitudes(state: Ket, basis: MeasurementBasis) -> Tuple[np.ndarray, Tuple[Label, ...]]:
    """Unnormalized residual amplitudes for every basis vector, one row each."""
    mat, rest = split_matrix(state, basis.targets)
    return basis.matrix.conj() @ mat, rest


def outcome_probabilities(state: Ket, basis: MeasurementBasis) -> np.ndarray:
    rows, _ = outcome_amplitudes(state, basis)
    return np.sum(np.abs(rows) ** 2, axis=1)


def measure(state: Ket, basis: MeasurementBasis, rng: np.random.Generator) -> Outcome:
    """Sample one outcome of a complete projective measurement."""
    if not basis.is_full:
        raise MeasurementError(
            f"Basis {basis.name!r} lists {len(basis)} of {2 ** len(basis.targets)} vectors; complete it first"
        )
    rows, rest = outcome_amplitudes(state, basis)
    probs = np.sum(np.abs(rows) ** 2, axis=1)
    total = float(probs.sum())
    if abs(total - 1.0) > config.EIGEN_TOL:
        raise MeasurementError(f"Outcome probabilities sum to {total!r}, not 1")
    index = int(rng.choice(len(probs), p=probs / total))
    prob = float(probs[index])
    residual = Ket(rows[index] / np.sqrt(prob), rest)
    logger.debug("measured %s -> outcome %d (p=%.6f)", basis.name, index, prob)
    return Outcome(index, residual, prob)


# Product-decomposition expressions: sums of juxtaposed kets, scalars and
# parenthesized sub-expressions. Kets are bitstrings or Bell/Hadamard names.
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ket>\|[^|>⟩]*[>⟩])|(?P<num>½|\d+(?:\.\d*)?(?:/\d+(?:\.\d*)?)?)|(?P<op>[()+\-]))"
)
_NAME_ALIASES = {"ψ": "psi", "φ": "phi", "Ψ": "psi", "Φ": "phi"}


class _Term(NamedTuple):
    amps: np.ndarray
    n: int


def _tokenize(expr: str) -> List[Tuple[str, str]]:
    tokens, pos = [], 0
    expr = expr.rstrip()
    while pos < len(expr):
        match = _TOKEN_RE.match(expr, pos)
        if not match or match.end() == pos:
            raise DecompositionError(f"Unexpected text at position {pos}: {expr[pos:pos + 10]!r}")
        kind = match.lastgroup
        tokens.append((kind, match.group(kind)))
        pos = match.end()
    return tokens


class _DecompositionParser:
    def __init__(self, expr: str, conv: BellConvention):
        self.tokens = _tokenize(expr)
        self.pos = 0
        self.named = conv.named()

    def peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise DecompositionError("Unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self) -> _Term:
        value = self.expr()
        if self.peek() is not None:
            raise DecompositionError(f"Unexpected token {self.peek()[1]!r}")
        return value

    def expr(self) -> _Term:
        sign = 1.0
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = -1.0 if self.take()[1] == "-" else 1.0
        total = self.term()
        total = _Term(sign * total.amps, total.n)
        while self.peek() in (("op", "+"), ("op", "-")):
            sign = -1.0 if self.take()[1] == "-" else 1.0
            nxt = self.term()
            if nxt.n != total.n:
                raise DecompositionError(f"Cannot add {total.n}-qubit and {nxt.n}-qubit terms")
            total = _Term(total.amps + sign * nxt.amps, total.n)
        return total

    def term(self) -> _Term:
        result = _Term(np.ones(1, dtype=complex), 0)
        count = 0
        while self.peek() is not None and self.peek() not in (("op", "+"), ("op", "-"), ("op", ")")):
            factor = self.factor()
            result = _Term(np.kron(result.amps, factor.amps), result.n + factor.n)
            count += 1
        if count == 0:
            raise DecompositionError("Empty term")
        return result

    def factor(self) -> _Term:
        kind, text = self.take()
        if kind == "op" and text == "(":
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise DecompositionError("Missing closing parenthesis")
            return inner
        if kind == "num":
            if text == "½":
                return _Term(np.array([0.5], dtype=complex), 0)
            num, _, den = text.partition("/")
            return _Term(np.array([float(num) / (float(den) if den else 1.0)], dtype=complex), 0)
        if kind == "ket":
            return self.ket(text[1:-1].strip())
        raise DecompositionError(f"Unexpected token {text!r}")

    def ket(self, name: str) -> _Term:
        sign = 1.0
        if len(name) > 1 and name.startswith("-"):
            sign, name = -1.0, name[1:]
        for alias, plain in _NAME_ALIASES.items():
            name = name.replace(alias, plain)
        if name and set(name) <= {"0", "1"}:
            ket = ket_from_terms([(1, name)])
        elif name in self.named:
            ket = self.named[name]
        else:
            raise DecompositionError(f"Unknown state name: {name!r}")
        return _Term(sign * ket.amplitudes, ket.n_qubits)


def expand_product_decomposition(expr: str, conv: Optional[BellConvention] = None,
                                 labels: Optional[Sequence[Label]] = None) -> Ket:
    """Expand a sum of tensor products of named states into a normalized ket."""
    conv = conv or BellConvention.standard()
    value = _DecompositionParser(expr, conv).parse()
    if value.n == 0:
        raise DecompositionError("Expression contains no kets")
    ket = Ket(value.amps, tuple(labels) if labels is not None else tuple(range(1, value.n + 1)))
    if ket.norm() <= config.ALGEBRA_TOL:
        raise DecompositionError("Expression expands to the zero vector")
    return ket.normalized()


@dataclass(frozen=True)
class DecompositionVerdict:
    convention: str
    fidelity: float
    matches: bool

    def to_dict(self) -> Dict:
        return {"convention": self.convention, "fidelity": self.fidelity, "matches": self.matches}


def check_decomposition(expr: str, target: Ket,
                        conventions: Optional[Sequence[BellConvention]] = None,
                        tol: float = config.EIGEN_TOL) -> List[DecompositionVerdict]:
    """Compare an expansion with `target` under each Bell convention."""
    conventions = conventions or (BellConvention.standard(), BellConvention.swapped())
    verdicts = []
    for conv in conventions:
        expanded = expand_product_decomposition(expr, conv)
        if expanded.dim != target.dim:
            raise DecompositionError(
                f"Expansion has {expanded.n_qubits} qubits, target has {target.n_qubits}"
            )
        fid = fidelity_up_to_phase(expanded, target.normalized())
        verdicts.append(DecompositionVerdict(conv.name, fid, fid >= 1.0 - tol))
    return verdicts
