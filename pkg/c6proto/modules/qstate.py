"""
State-vector algebra for small labeled qubit registers.

Kets carry a dense complex amplitude vector and an ordered tuple of qubit
labels. Label order is bit order: the first label is the leftmost character
of a bitstring and the most significant bit of an amplitude index. Cluster
qubits are labeled 1..6, the payload qubits "a" and "b".
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Hashable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

import config
from ..errors import LabelError, StateError

logger = logging.getLogger(__name__)

Label = Hashable
MAX_QUBITS = 10


@dataclass(frozen=True, eq=False)
class Ket:
    """Pure state over labeled qubits. Immutable once constructed."""

    amplitudes: np.ndarray
    labels: Tuple[Label, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if len(labels) > MAX_QUBITS:
            raise StateError(f"Invalid register size {len(labels)}: at most {MAX_QUBITS} qubits")
        if amps.size != 2 ** len(labels):
            raise StateError(
                f"Invalid amplitude count {amps.size} for {len(labels)} qubits"
            )
        if len(set(labels)) != len(labels):
            raise LabelError(f"Duplicate qubit labels: {labels}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", labels)

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = config.ALGEBRA_TOL) -> bool:
        return abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1.0) <= tol

    def normalized(self) -> "Ket":
        norm = self.norm()
        if norm == 0.0:
            raise StateError("Cannot normalize the zero vector")
        return Ket(self.amplitudes / norm, self.labels)

    def relabel(self, labels: Sequence[Label]) -> "Ket":
        """Same amplitudes under new names (no reordering)."""
        return Ket(self.amplitudes, tuple(labels))

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def amplitude(self, bits: str) -> complex:
        if len(bits) != self.n_qubits:
            raise StateError(f"Invalid bitstring {bits!r} for {self.n_qubits} qubits")
        return complex(self.amplitudes[int(bits, 2)])

    def terms(self, tol: float = config.ALGEBRA_TOL) -> List[Tuple[complex, str]]:
        """Nonzero (amplitude, bitstring) pairs in index order."""
        width = self.n_qubits
        return [
            (complex(amp), format(idx, f"0{width}b") if width else "")
            for idx, amp in enumerate(self.amplitudes)
            if abs(amp) > tol
        ]

    def __str__(self) -> str:
        parts = []
        for amp, bits in self.terms():
            if abs(amp.imag) <= config.ALGEBRA_TOL:
                coef = f"{amp.real:+.6g}"
            else:
                coef = f"+({amp.real:.6g}{amp.imag:+.6g}j)"
            parts.append(f"{coef}|{bits}>")
        return " ".join(parts) or "0"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over labeled qubits."""

    matrix: np.ndarray
    labels: Tuple[Label, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        mat = np.array(self.matrix, dtype=complex)
        dim = 2 ** len(labels)
        if mat.shape != (dim, dim):
            raise StateError(f"Invalid density matrix shape {mat.shape} for {len(labels)} qubits")
        if len(set(labels)) != len(labels):
            raise LabelError(f"Duplicate qubit labels: {labels}")
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=config.ALGEBRA_TOL):
            raise StateError("Invalid density matrix: not Hermitian")
        if abs(np.trace(mat).real - 1.0) > config.ALGEBRA_TOL:
            raise StateError(f"Invalid density matrix: trace {np.trace(mat).real!r} != 1")
        if linalg.eigvalsh(mat).min() < -config.ALGEBRA_TOL:
            raise StateError("Invalid density matrix: negative eigenvalue")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_ket(cls, ket: Ket) -> "DensityMatrix":
        amps = ket.normalized().amplitudes
        return cls(np.outer(amps, amps.conj()), ket.labels)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order, tiny negatives clamped to zero."""
        evals = linalg.eigvalsh(self.matrix)
        return np.where(evals < 0.0, 0.0, evals)

    def expectation(self, ket: Ket) -> float:
        """<psi|rho|psi> for a ket over the same number of qubits."""
        if ket.dim != self.dim:
            raise StateError(f"Dimension mismatch: {ket.dim} vs {self.dim}")
        amps = ket.amplitudes
        return float(np.vdot(amps, self.matrix @ amps).real)

    def evolve(self, unitary: np.ndarray) -> "DensityMatrix":
        return DensityMatrix(unitary @ self.matrix @ unitary.conj().T, self.labels)


@dataclass(frozen=True)
class SecretState:
    """Two-qubit payload alpha|00> + mu|01> + gamma|10> + beta|11>."""

    alpha: complex
    mu: complex
    gamma: complex
    beta: complex

    def __post_init__(self):
        for name in ("alpha", "mu", "gamma", "beta"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        total = float(np.sum(np.abs(self.vector) ** 2))
        if abs(total - 1.0) > config.ALGEBRA_TOL:
            raise StateError(f"Invalid secret: squared norm {total!r} != 1")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.mu, self.gamma, self.beta], dtype=complex)

    def ket(self, labels: Sequence[Label] = ("a", "b")) -> Ket:
        return Ket(self.vector, tuple(labels))

    @classmethod
    def from_vector(cls, values: Iterable[complex], normalize: bool = False) -> "SecretState":
        vec = np.array(list(values), dtype=complex)
        if vec.size != 4:
            raise StateError(f"Invalid secret: expected 4 amplitudes, got {vec.size}")
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0.0:
                raise StateError("Invalid secret: zero vector")
            vec = vec / norm
        return cls(*vec)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SecretState":
        """Haar-random payload from four complex standard normals."""
        draws = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        return cls.from_vector(draws, normalize=True)

    @classmethod
    def basis(cls, index: int) -> "SecretState":
        vec = np.zeros(4, dtype=complex)
        vec[index] = 1.0
        return cls(*vec)

    @classmethod
    def phase_family(cls, phi: float) -> "SecretState":
        """alpha = beta = 1/2, mu = gamma = exp(i phi)/2."""
        phase = np.exp(1j * phi) / 2.0
        return cls(0.5, phase, phase, 0.5)

    def as_pairs(self) -> List[List[float]]:
        return [[float(v.real), float(v.imag)] for v in self.vector]


def _bit_matrix(n: int) -> np.ndarray:
    """Row i holds the big-endian bits of index i."""
    idx = np.arange(2 ** n)
    return (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1


def ket_from_terms(
    terms: Sequence[Tuple[complex, str]],
    labels: Optional[Sequence[Label]] = None,
    normalize: bool = False,
) -> Ket:
    """Build a ket from (coefficient, bitstring) pairs."""
    if not terms:
        raise StateError("Invalid term list: empty")
    width = len(terms[0][1])
    amps = np.zeros(2 ** width, dtype=complex)
    seen = set()
    for coef, bits in terms:
        if len(bits) != width:
            raise StateError(f"Invalid term {bits!r}: expected {width} bits")
        if set(bits) - {"0", "1"}:
            raise StateError(f"Invalid bitstring: {bits!r}")
        if bits in seen:
            raise StateError(f"Duplicate term: {bits!r}")
        seen.add(bits)
        amps[int(bits, 2) if width else 0] = coef
    ket = Ket(amps, tuple(labels) if labels is not None else tuple(range(1, width + 1)))
    return ket.normalized() if normalize else ket


def ghz(n: int, labels: Optional[Sequence[Label]] = None) -> Ket:
    if n < 1:
        raise StateError(f"Invalid GHZ size: {n}")
    return ket_from_terms([(1, "0" * n), (1, "1" * n)], labels, normalize=True)


def cluster_chain(n: int, labels: Optional[Sequence[Label]] = None) -> Ket:
    """Linear cluster: |+>^n with a controlled-Z between each site and its successor."""
    if n < 2:
        raise StateError(f"Invalid cluster size: {n}")
    bits = _bit_matrix(n)
    bonds = np.sum(bits[:, :-1] & bits[:, 1:], axis=1)
    amps = np.where(bonds % 2 == 0, 1.0, -1.0) / 2 ** (n / 2)
    return Ket(amps, tuple(labels) if labels is not None else tuple(range(1, n + 1)))


def c6() -> Ket:
    """The six-photon channel (|000000> + |000111> + |111000> - |111111>)/2."""
    return ket_from_terms(
        [(1, "000000"), (1, "000111"), (1, "111000"), (-1, "111111")], normalize=True
    )


def tensor(a: Ket, b: Ket) -> Ket:
    clash = set(a.labels) & set(b.labels)
    if clash:
        raise LabelError(f"Label collision in tensor product: {sorted(map(str, clash))}")
    return Ket(np.kron(a.amplitudes, b.amplitudes), a.labels + b.labels)


def permute(k: Ket, new_label_order: Sequence[Label]) -> Ket:
    order = tuple(new_label_order)
    if len(order) != k.n_qubits or set(order) != set(k.labels):
        raise LabelError(f"Invalid label order {order} for register {k.labels}")
    axes = [k.labels.index(label) for label in order]
    return Ket(np.transpose(k.as_tensor(), axes).reshape(-1), order)


def apply_operator(k: Ket, operator: np.ndarray, targets: Sequence[Label]) -> Ket:
    """Apply a 2^m x 2^m operator to `targets`, leaving the label order unchanged."""
    targets = tuple(targets)
    op = np.asarray(operator, dtype=complex)
    if op.shape != (2 ** len(targets), 2 ** len(targets)):
        raise StateError(f"Operator shape {op.shape} does not fit targets {targets}")
    mat, rest = split_matrix(k, targets)
    moved = Ket((op @ mat).reshape(-1), targets + rest)
    return permute(moved, k.labels)


def split_matrix(k: Ket, front: Sequence[Label]) -> Tuple[np.ndarray, Tuple[Label, ...]]:
    """Amplitudes as a (2^m, 2^r) matrix with `front` qubits on the row index.

    The remaining labels keep their relative order and are returned alongside.
    """
    front = tuple(front)
    unknown = [label for label in front if label not in k.labels]
    if unknown:
        raise LabelError(f"Unknown qubit labels: {unknown}")
    if len(set(front)) != len(front):
        raise LabelError(f"Duplicate qubit labels: {front}")
    rest = tuple(label for label in k.labels if label not in front)
    moved = permute(k, front + rest)
    return moved.amplitudes.reshape(2 ** len(front), 2 ** len(rest)), rest


def reduced_density(k: Ket, keep: Union[Sequence[Label], set, frozenset]) -> DensityMatrix:
    """Partial trace over every qubit not in `keep`.

    A set keeps the register's order; a sequence fixes the order explicitly.
    """
    if isinstance(keep, (set, frozenset)):
        unknown = [label for label in keep if label not in k.labels]
        if unknown:
            raise LabelError(f"Unknown qubit labels: {unknown}")
        order = tuple(label for label in k.labels if label in keep)
    else:
        order = tuple(keep)
    mat, _ = split_matrix(k.normalized(), order)
    return DensityMatrix(mat @ mat.conj().T, order)


def entropy(d: Union[DensityMatrix, np.ndarray], tol: float = 1e-14) -> float:
    """Von Neumann entropy in bits; 0 log 0 is taken as 0."""
    if not isinstance(d, DensityMatrix):
        mat = np.asarray(d, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise StateError(f"Invalid density matrix shape {mat.shape}")
        n = int(np.log2(mat.shape[0]))
        d = DensityMatrix(mat, tuple(range(1, n + 1)))
    evals = d.eigenvalues()
    evals = evals[evals > tol]
    return max(0.0, float(-np.sum(evals * np.log2(evals))))


def fidelity_up_to_phase(a: Ket, b: Ket) -> float:
    if a.dim != b.dim:
        raise StateError(f"Dimension mismatch: {a.dim} vs {b.dim}")
    return min(1.0, float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def ebits(k: Ket, partition: Iterable[Label]) -> float:
    part = set(partition)
    if not part or part >= set(k.labels):
        raise StateError(f"Invalid partition {sorted(map(str, part))}: must be a nonempty proper subset")
    return entropy(reduced_density(k, part))


def max_bipartite_ebits(k: Ket, size: int) -> Tuple[float, Tuple[Label, ...]]:
    """Largest entanglement entropy over every cut with `size` qubits on one side."""
    best = (-1.0, ())
    for part in itertools.combinations(k.labels, size):
        value = ebits(k, part)
        if value > best[0] + config.EIGEN_TOL:
            best = (value, part)
    logger.debug("max ebits over %d-qubit cuts: %.12f at %s", size, best[0], best[1])
    return best


def trace_distance(d1: DensityMatrix, d2: DensityMatrix) -> float:
    if d1.dim != d2.dim:
        raise StateError(f"Dimension mismatch: {d1.dim} vs {d2.dim}")
    return float(0.5 * np.sum(np.abs(linalg.eigvalsh(d1.matrix - d2.matrix))))
