"""
Protocols Module
Scripted LOCC runs over the six-qubit cluster channel: teleportation, two
splitting protocols, remote state preparation, and dense coding.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from ..errors import CompletionOutcomeError, NotACodewordError, ProtocolError, StateError
from .measure import MeasurementBasis, Outcome, measure, outcome_amplitudes, outcome_probabilities, partial_inner
from .qstate import (
    DensityMatrix,
    Ket,
    Label,
    SecretState,
    apply_operator,
    c6,
    entropy,
    fidelity_up_to_phase,
    permute,
    reduced_density,
    tensor,
    trace_distance,
)
from .synth import GATES, LocalOp, complete_basis, synthesize_correction
from .tables import INPUT_LABELS, Layout, PartyAssignment, ProtocolTable, load_table, phase_family_payloads

logger = logging.getLogger(__name__)


def _layout(printed: Sequence[Label], *parties: Tuple[str, Tuple[Label, ...]]) -> Layout:
    return Layout(PartyAssignment(tuple(parties)), tuple(printed))


# Layouts under which the printed tables reproduce. Alice's kets read the
# payload as (b, a) in the first two tables and as (a, b) in the fourth.
# The channel is symmetric within {1, 2, 3} and within {4, 5, 6}, so a layout
# is only fixed up to those exchanges; inference on table 2 returns QIS1_LAYOUT
# with 5 and 6 exchanged.
TELEPORT_LAYOUT = _layout((3, 4), ("alice", ("b", "a", 1, 6, 2, 5)), ("bob", (3, 4)))
QIS1_LAYOUT = _layout((3, 5, 2, 4), ("alice", ("b", "a", 1, 6)), ("bob", (3, 5)), ("charlie", (2, 4)))
QIS1_BOB_LAYOUT = _layout((3, 4), ("bob", (1, 2)), ("charlie", (3, 4)))
QIS2_LAYOUT = _layout((4, 2, 6), ("alice", ("a", "b", 1, 5, 3)), ("charlie", (4, 2)), ("bob", (6,)))
QIS2_BOB_LAYOUT = _layout((1, 2), ("bob", (3,)), ("charlie", (1, 2)))
RSP_LAYOUT = _layout((3, 4), ("alice", (1, 6, 2, 5)), ("bob", (3, 4)))

CERTIFIED_LAYOUTS: Dict[str, Layout] = {
    "1": TELEPORT_LAYOUT,
    "2": QIS1_LAYOUT,
    "3": QIS1_BOB_LAYOUT,
    "4": QIS2_LAYOUT,
    "5": QIS2_BOB_LAYOUT,
    "6": RSP_LAYOUT,
}

# Sign rows inside each block of four measurement vectors.
SIGNS_A = ((1, 1, 1, 1), (1, -1, -1, 1), (1, -1, 1, -1), (1, 1, -1, -1))
SIGNS_B = ((1, 1, 1, 1), (1, 1, -1, -1), (1, -1, -1, 1), (1, -1, 1, -1))

CBIT_BUDGETS = {"teleport": 4, "qis1": 6, "qis2": 5, "rsp": 2}
PAULI_NAMES = ("I", "X", "Y", "Z")
DENSE_QUBITS = (1, 6, 4)


def joint_state(secret: SecretState, channel: Optional[Ket] = None) -> Ket:
    return tensor(secret.ket(INPUT_LABELS), channel if channel is not None else c6())


def alice_basis(layout: Layout, signs: Sequence[Sequence[int]], channel: Optional[Ket] = None,
                name: str = "") -> MeasurementBasis:
    """Measurement basis pairing payload k with channel term k + j in block j.

    Channel terms are ordered by the value of the receivers' bits in print
    order. Each block carries one vector per sign row; the 16 vectors are
    completed to a full basis.
    """
    channel = channel if channel is not None else c6()
    terms = channel.terms()
    if len(terms) != 4:
        raise ProtocolError(f"Channel has {len(terms)} terms; the block construction needs 4")
    position = {label: i for i, label in enumerate(channel.labels)}

    def bits_on(bits: str, labels: Sequence[Label]) -> str:
        return "".join(bits[position[label]] for label in labels)

    ordered = sorted(terms, key=lambda t: int(bits_on(t[1], layout.printed), 2))
    if len({bits_on(t[1], layout.printed) for t in ordered}) != 4:
        raise ProtocolError(f"Receivers {layout.printed} cannot tell the channel terms apart")

    measured = layout.measured
    kets = []
    for block in range(4):
        for row in signs:
            amps = np.zeros(2 ** len(measured), dtype=complex)
            for k in range(4):
                payload = {"a": (k >> 1) & 1, "b": k & 1}
                term_bits = ordered[(k + block) % 4][1]
                bits = "".join(
                    str(payload[label]) if label in payload else term_bits[position[label]]
                    for label in measured
                )
                amps[int(bits, 2)] += row[k] * 0.5
            kets.append(Ket(amps, measured))
    return complete_basis(kets, 2 ** len(measured), measured, name=name)


def _qubits_at(positions: Sequence[int], printed: Sequence[Label]) -> Tuple[Label, ...]:
    return tuple(printed[p - 1] for p in positions)


@lru_cache(maxsize=None)
def teleport_basis() -> MeasurementBasis:
    return alice_basis(TELEPORT_LAYOUT, SIGNS_A, name="teleport")


@lru_cache(maxsize=None)
def qis1_alice_basis() -> MeasurementBasis:
    return alice_basis(QIS1_LAYOUT, SIGNS_A, name="qis1-alice")


@lru_cache(maxsize=None)
def qis2_alice_basis() -> MeasurementBasis:
    return alice_basis(QIS2_LAYOUT, SIGNS_B, name="qis2-alice")


@lru_cache(maxsize=None)
def bundled_table(table_name: str) -> ProtocolTable:
    """A bundled table, parsed once per process."""
    return load_table(table_name)


def _table_basis(table_name: str, targets: Tuple[Label, ...], secret: Optional[SecretState] = None,
                 name: str = "") -> MeasurementBasis:
    listed = bundled_table(table_name).measurement_basis(targets, secret)
    return complete_basis(listed.kets(), 2 ** len(targets), targets, name=name)


@lru_cache(maxsize=None)
def qis1_bob_basis() -> MeasurementBasis:
    targets = _qubits_at(QIS1_BOB_LAYOUT.measured, QIS1_LAYOUT.printed)
    return _table_basis("table3", targets, name="qis1-bob")


@lru_cache(maxsize=None)
def qis2_bob_basis() -> MeasurementBasis:
    targets = _qubits_at(QIS2_BOB_LAYOUT.measured, QIS2_LAYOUT.printed)
    return _table_basis("table5", targets, name="qis2-bob")


def rsp_basis(secret: SecretState) -> MeasurementBasis:
    """Alice's basis for remote preparation; orthonormal only for the phase family."""
    return _table_basis("table6", RSP_LAYOUT.measured, secret, name="rsp")


def _secret_on(labels: Tuple[Label, ...]) -> Callable[[SecretState], Ket]:
    return lambda secret: secret.ket(labels)


def _charlie(layout: Layout) -> Tuple[Label, ...]:
    return layout.assignment.labels("charlie")


@lru_cache(maxsize=None)
def teleport_correction(outcome: int) -> LocalOp:
    basis, bob = teleport_basis(), TELEPORT_LAYOUT.printed

    def residual(secret: SecretState) -> Ket:
        return permute(partial_inner(joint_state(secret), basis.ket(outcome)), bob)

    return synthesize_correction(residual, _secret_on(bob))


def _split_correction(alice: MeasurementBasis, bob: MeasurementBasis, charlie: Tuple[Label, ...],
                      alice_outcome: int, bob_outcome: int) -> LocalOp:
    def residual(secret: SecretState) -> Ket:
        after_alice = partial_inner(joint_state(secret), alice.ket(alice_outcome))
        return permute(partial_inner(after_alice, bob.ket(bob_outcome)), charlie)

    return synthesize_correction(residual, _secret_on(charlie))


@lru_cache(maxsize=None)
def qis1_correction(alice_outcome: int, bob_outcome: int) -> LocalOp:
    return _split_correction(qis1_alice_basis(), qis1_bob_basis(), _charlie(QIS1_LAYOUT),
                             alice_outcome, bob_outcome)


@lru_cache(maxsize=None)
def qis2_correction(alice_outcome: int, bob_outcome: int) -> LocalOp:
    return _split_correction(qis2_alice_basis(), qis2_bob_basis(), _charlie(QIS2_LAYOUT),
                             alice_outcome, bob_outcome)


@lru_cache(maxsize=None)
def rsp_correction(outcome: int) -> LocalOp:
    bob = RSP_LAYOUT.printed

    def residual(secret: SecretState) -> Ket:
        return permute(partial_inner(c6(), rsp_basis(secret).ket(outcome)), bob)

    rng = np.random.default_rng(config.DEFAULT_SEED)
    fit = [SecretState.phase_family(0.1 + 2.0 * np.pi * k / 5) for k in range(5)]
    check = [SecretState.phase_family(phi) for phi in rng.uniform(0.0, 2.0 * np.pi, config.RANDOM_PAYLOADS)]
    return synthesize_correction(residual, _secret_on(bob), fit, check)


@dataclass(frozen=True)
class MeasurementRecord:
    party: str
    targets: Tuple[Label, ...]
    outcome: int
    probability: float
    cbits: int
    sent_to: str

    def to_dict(self) -> Dict:
        return {
            "party": self.party,
            "qubits": [str(label) for label in self.targets],
            "outcome": self.outcome,
            "probability": self.probability,
            "cbits": self.cbits,
            "sent_to": self.sent_to,
        }


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    """Full record of one protocol run."""

    protocol: str
    secret: SecretState
    layout: Layout
    steps: Tuple[MeasurementRecord, ...]
    corrections: Tuple[LocalOp, ...]
    final_state: Ket
    fidelity: float
    seed: Optional[int] = None
    phi: Optional[float] = None
    elapsed: float = field(default=0.0, compare=False)

    @property
    def cbits(self) -> int:
        return sum(step.cbits for step in self.steps)

    @property
    def outcomes(self) -> Tuple[int, ...]:
        return tuple(step.outcome for step in self.steps)

    def to_dict(self) -> Dict:
        """Structured form; wall time is left out so reruns serialize identically."""
        out = {
            "protocol": self.protocol,
            "seed": self.seed,
            "secret": self.secret.as_pairs(),
            "assignment": self.layout.to_dict(),
            "measurements": [step.to_dict() for step in self.steps],
            "outcomes": list(self.outcomes),
            "cbits": self.cbits,
            "cbits_per_message": [step.cbits for step in self.steps],
            "corrections": [op.describe() for op in self.corrections],
            "final_state": str(self.final_state),
            "fidelity": self.fidelity,
        }
        if self.phi is not None:
            out["phi"] = self.phi
        return out


def _cbits(basis: MeasurementBasis) -> int:
    return int(math.ceil(math.log2(basis.listed))) if basis.listed > 1 else 0


def _measure_listed(state: Ket, basis: MeasurementBasis, rng: np.random.Generator) -> Outcome:
    """Measure and insist that no completion vector carries weight."""
    stray = float(np.sum(outcome_probabilities(state, basis)[basis.listed:]))
    if stray > config.COMPLETION_TOL:
        raise CompletionOutcomeError(f"Basis {basis.name!r}: completion outcomes carry probability {stray!r}")
    outcome = measure(state, basis, rng)
    if basis.is_completion(outcome.index):
        raise CompletionOutcomeError(f"Basis {basis.name!r}: completion outcome {outcome.index} observed")
    return outcome


def _finish(protocol: str, secret: SecretState, layout: Layout, steps: List[MeasurementRecord],
            corrections: List[LocalOp], final: Ket, started: float,
            seed: Optional[int] = None, phi: Optional[float] = None) -> ProtocolTranscript:
    fid = fidelity_up_to_phase(final.normalized(), secret.ket(final.labels))
    transcript = ProtocolTranscript(protocol, secret, layout, tuple(steps), tuple(corrections), final, fid,
                                    seed, phi, time.perf_counter() - started)
    if transcript.cbits != CBIT_BUDGETS[protocol]:
        raise ProtocolError(f"{protocol} sent {transcript.cbits} cbits, budget is {CBIT_BUDGETS[protocol]}")
    logger.debug("%s outcomes=%s fidelity=%.15f", protocol, transcript.outcomes, fid)
    return transcript


def teleport(secret: SecretState, rng: np.random.Generator, seed: Optional[int] = None) -> ProtocolTranscript:
    """Alice's six-qubit measurement, four cbits, Bob's correction on (3, 4)."""
    started = time.perf_counter()
    basis = teleport_basis()
    alice = _measure_listed(joint_state(secret), basis, rng)
    step = MeasurementRecord("alice", basis.targets, alice.index, alice.probability, _cbits(basis), "bob")
    op = teleport_correction(alice.index)
    final = op.apply(permute(alice.residual, TELEPORT_LAYOUT.printed))
    return _finish("teleport", secret, TELEPORT_LAYOUT, [step], [op], final, started, seed)


def _split(protocol: str, layout: Layout, alice_basis_: MeasurementBasis, bob_basis: MeasurementBasis,
           correction: Callable[[int, int], LocalOp], secret: SecretState, rng: np.random.Generator,
           seed: Optional[int]) -> ProtocolTranscript:
    started = time.perf_counter()
    alice = _measure_listed(joint_state(secret), alice_basis_, rng)
    bob = _measure_listed(alice.residual, bob_basis, rng)
    steps = [
        MeasurementRecord("alice", alice_basis_.targets, alice.index, alice.probability,
                          _cbits(alice_basis_), "charlie"),
        MeasurementRecord("bob", bob_basis.targets, bob.index, bob.probability, _cbits(bob_basis), "charlie"),
    ]
    op = correction(alice.index, bob.index)
    final = op.apply(permute(bob.residual, _charlie(layout)))
    return _finish(protocol, secret, layout, steps, [op], final, started, seed)


def qis1(secret: SecretState, rng: np.random.Generator, seed: Optional[int] = None) -> ProtocolTranscript:
    """Splitting with a four-qubit Alice measurement and a two-qubit Bob measurement."""
    return _split("qis1", QIS1_LAYOUT, qis1_alice_basis(), qis1_bob_basis(), qis1_correction, secret, rng, seed)


def qis2(secret: SecretState, rng: np.random.Generator, seed: Optional[int] = None) -> ProtocolTranscript:
    """Splitting with a five-qubit Alice measurement and Bob's Hadamard-basis measurement."""
    return _split("qis2", QIS2_LAYOUT, qis2_alice_basis(), qis2_bob_basis(), qis2_correction, secret, rng, seed)


def rsp(phi: float, rng: np.random.Generator, seed: Optional[int] = None) -> ProtocolTranscript:
    """Remote preparation of (|00> + e^{i phi}|01> + e^{i phi}|10> + |11>)/2 with two cbits."""
    started = time.perf_counter()
    secret = SecretState.phase_family(phi)
    basis = rsp_basis(secret)
    alice = _measure_listed(c6(), basis, rng)
    step = MeasurementRecord("alice", basis.targets, alice.index, alice.probability, _cbits(basis), "bob")
    op = rsp_correction(alice.index)
    final = op.apply(permute(alice.residual, RSP_LAYOUT.printed))
    return _finish("rsp", secret, RSP_LAYOUT, [step], [op], final, started, seed, phi=float(phi))


PROTOCOLS = {"teleport": teleport, "qis1": qis1, "qis2": qis2, "rsp": rsp}


def prepare(protocol: str) -> None:
    """Build the bases and corrections a protocol needs ahead of parallel runs."""
    if protocol == "teleport":
        for i in range(teleport_basis().listed):
            teleport_correction(i)
    elif protocol in ("qis1", "qis2"):
        alice = qis1_alice_basis() if protocol == "qis1" else qis2_alice_basis()
        bob = qis1_bob_basis() if protocol == "qis1" else qis2_bob_basis()
        correction = qis1_correction if protocol == "qis1" else qis2_correction
        for i in range(alice.listed):
            for j in range(bob.listed):
                correction(i, j)
    elif protocol == "rsp":
        for i in range(len(bundled_table("table6").rows)):
            rsp_correction(i)
    else:
        raise ProtocolError(f"Unknown protocol: {protocol!r}")


def run_protocol(protocol: str, seed: int, secret: Optional[SecretState] = None,
                 phi: Optional[float] = None) -> ProtocolTranscript:
    """Run one protocol from a seed; the payload is drawn from the same stream when absent."""
    if protocol not in PROTOCOLS:
        raise ProtocolError(f"Unknown protocol: {protocol!r}")
    rng = np.random.default_rng(seed)
    if protocol == "rsp":
        if phi is None:
            phi = float(rng.uniform(0.0, 2.0 * np.pi))
        return rsp(phi, rng, seed)
    if secret is None:
        secret = SecretState.random(rng)
    return PROTOCOLS[protocol](secret, rng, seed)


def outcome_distribution(protocol: str, secret: SecretState) -> np.ndarray:
    """Exact probabilities of the measuring party's listed outcomes."""
    if protocol == "rsp":
        basis = rsp_basis(secret)
        return outcome_probabilities(c6(), basis)[:basis.listed]
    basis = {"teleport": teleport_basis, "qis1": qis1_alice_basis, "qis2": qis2_alice_basis}[protocol]()
    return outcome_probabilities(joint_state(secret), basis)[:basis.listed]


def receiver_state(protocol: str, secret: SecretState) -> DensityMatrix:
    """Receivers' state after the first measurement, averaged over its outcomes."""
    if protocol == "rsp":
        state, basis = c6(), rsp_basis(secret)
    elif protocol in ("teleport", "qis1", "qis2"):
        state = joint_state(secret)
        basis = {"teleport": teleport_basis, "qis1": qis1_alice_basis, "qis2": qis2_alice_basis}[protocol]()
    else:
        raise ProtocolError(f"Unknown protocol: {protocol!r}")
    rows, rest = outcome_amplitudes(state, basis)
    return DensityMatrix(rows.T @ rows.conj(), rest)


def no_signaling_distance(protocol: str, secret_a: SecretState, secret_b: SecretState) -> float:
    return trace_distance(receiver_state(protocol, secret_a), receiver_state(protocol, secret_b))


def solo_guess_fidelity(protocol: str, secret: SecretState) -> float:
    """How well Charlie recovers the secret without Bob's cbits.

    Charlie knows Alice's outcome and applies the correction he would use for
    Bob's first outcome; his state is averaged over Alice's outcomes.
    """
    if protocol == "qis1":
        basis, layout, correction = qis1_alice_basis(), QIS1_LAYOUT, qis1_correction
    elif protocol == "qis2":
        basis, layout, correction = qis2_alice_basis(), QIS2_LAYOUT, qis2_correction
    else:
        raise ProtocolError(f"Solo guessing is defined for qis1 and qis2, not {protocol!r}")
    charlie = _charlie(layout)
    rows, rest = outcome_amplitudes(joint_state(secret), basis)
    rho = np.zeros((4, 4), dtype=complex)
    for index in range(basis.listed):
        prob = float(np.vdot(rows[index], rows[index]).real)
        if prob <= config.PROBABILITY_FLOOR:
            continue
        branch = reduced_density(Ket(rows[index] / np.sqrt(prob), rest), charlie)
        rho += prob * branch.evolve(correction(index, 0).matrix()).matrix
    return DensityMatrix(rho, charlie).expectation(secret.ket(charlie))


@dataclass(frozen=True, order=True)
class DenseMessage:
    """Five classical bits as Pauli indices on qubits 1 and 6 and a bit flip on qubit 4."""

    u1: int
    u2: int
    u3: int

    def __post_init__(self):
        if not (0 <= self.u1 <= 3 and 0 <= self.u2 <= 3 and 0 <= self.u3 <= 1):
            raise ValueError(f"Invalid dense message: ({self.u1}, {self.u2}, {self.u3})")

    @classmethod
    def from_int(cls, value: int) -> "DenseMessage":
        if not 0 <= value <= 31:
            raise ValueError(f"Invalid dense message number: {value}")
        return cls((value >> 3) & 3, (value >> 1) & 3, value & 1)

    def to_int(self) -> int:
        return (self.u1 << 3) | (self.u2 << 1) | self.u3

    def bits(self) -> str:
        return format(self.to_int(), "05b")

    def operators(self) -> Tuple[str, str, str]:
        return PAULI_NAMES[self.u1], PAULI_NAMES[self.u2], PAULI_NAMES[self.u3]


def dense_encode(msg: DenseMessage, channel: Optional[Ket] = None) -> Ket:
    state = channel if channel is not None else c6()
    for name, label in zip(msg.operators(), DENSE_QUBITS):
        if name != "I":
            state = apply_operator(state, GATES[name], (label,))
    return state.normalized()


@lru_cache(maxsize=None)
def dense_codebook() -> Tuple[Ket, ...]:
    return tuple(dense_encode(DenseMessage.from_int(n)) for n in range(32))


def dense_decode(state: Ket, tol: float = config.EIGEN_TOL) -> DenseMessage:
    """The message whose codeword matches `state` up to phase."""
    book = dense_codebook()
    if state.labels != book[0].labels:
        if set(state.labels) != set(book[0].labels):
            raise StateError(f"Register {state.labels} is not the channel's {book[0].labels}")
        state = permute(state, book[0].labels)
    words = np.vstack([k.amplitudes for k in book])
    fidelities = np.abs(words.conj() @ state.normalized().amplitudes) ** 2
    best = int(np.argmax(fidelities))
    if fidelities[best] < 1.0 - tol:
        raise NotACodewordError(f"Not a codeword: best fidelity {fidelities[best]:.6f}")
    return DenseMessage.from_int(best)


def capacity(channel: Ket, alice_labels) -> float:
    """log2 d_A + S(rho_B) - S(rho_AB) for a pure channel."""
    alice = set(alice_labels)
    if not alice or alice >= set(channel.labels):
        raise StateError(f"Invalid sender qubits {sorted(map(str, alice))}: must be a nonempty proper subset")
    unknown = alice - set(channel.labels)
    if unknown:
        raise StateError(f"Unknown qubit labels: {sorted(map(str, unknown))}")
    bob = set(channel.labels) - alice
    joint = entropy(DensityMatrix.from_ket(channel))
    return float(len(alice) + entropy(reduced_density(channel, bob)) - joint)


def rsp_payloads(count: int = config.RSP_PHI_GRID) -> List[SecretState]:
    return phase_family_payloads(count)
