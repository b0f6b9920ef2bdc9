import numpy as np
import pytest

from c6proto.errors import BasisError, CompletionOutcomeError, NotACodewordError, ProtocolError, StateError
from c6proto.modules import protocols
from c6proto.modules.measure import partial_inner
from c6proto.modules.protocols import (
    CBIT_BUDGETS,
    QIS1_LAYOUT,
    bundled_table,
    DenseMessage,
    capacity,
    dense_decode,
    dense_encode,
    joint_state,
    no_signaling_distance,
    outcome_distribution,
    qis1_correction,
    qis2_alice_basis,
    rsp_basis,
    rsp_correction,
    run_protocol,
    solo_guess_fidelity,
    teleport_basis,
    teleport_correction,
)
from c6proto.modules.qstate import Ket, SecretState, apply_operator, c6, fidelity_up_to_phase, ghz, permute
from c6proto.modules.synth import GATES, complete_basis, infer_assignment
from c6proto.modules.tables import TableOracle

PROTOCOL_NAMES = ["teleport", "qis1", "qis2", "rsp"]


def overlap(table, row_index, vector):
    return abs(np.vdot(table.outcome_vector(table.row(row_index)), vector))


def test_teleport_basis_starts_with_printed_row(tables):
    basis = teleport_basis()
    assert basis.listed == 16
    assert overlap(tables["1"], 1, basis.matrix[0]) == pytest.approx(1.0)


def test_qis2_basis_starts_with_printed_row(tables):
    basis = qis2_alice_basis()
    assert basis.listed == 16
    assert overlap(tables["4"], 1, basis.matrix[0]) == pytest.approx(1.0)


def test_teleport_first_outcome_residual(rng):
    secret = SecretState.random(rng)
    residual = permute(partial_inner(joint_state(secret), teleport_basis().ket(0)), (3, 4))
    alpha, mu, gamma, beta = secret.vector
    expected = Ket(np.array([alpha, mu, gamma, -beta]), (3, 4))
    assert fidelity_up_to_phase(residual.normalized(), expected) == pytest.approx(1.0)


def test_teleport_first_correction_is_controlled_phase():
    op = teleport_correction(0)
    assert op.describe() == "CZ"
    assert op.cz and op.linear == "I" and op.phase == 1


def test_split_corrections_use_linear_maps():
    linears = {qis1_correction(i, 0).linear for i in range(16)}
    assert linears - {"I"}


@pytest.mark.parametrize("protocol", PROTOCOL_NAMES)
@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_protocol_fidelity(protocol, seed):
    transcript = run_protocol(protocol, seed)
    assert transcript.fidelity == pytest.approx(1.0, abs=1e-9)
    assert transcript.cbits == CBIT_BUDGETS[protocol]


def test_split_transcript_steps():
    transcript = run_protocol("qis1", 5)
    assert [step.party for step in transcript.steps] == ["alice", "bob"]
    assert [step.cbits for step in transcript.steps] == [4, 2]
    assert transcript.steps[1].targets == (3, 5)
    assert transcript.layout == QIS1_LAYOUT
    assert transcript.final_state.labels == (2, 4)


def test_same_seed_same_transcript():
    first = run_protocol("qis2", 11).to_dict()
    assert first == run_protocol("qis2", 11).to_dict()
    assert "elapsed" not in first


def test_explicit_payloads():
    secret = SecretState.basis(2)
    assert run_protocol("teleport", 3, secret=secret).secret == secret
    assert run_protocol("rsp", 3, phi=0.7).phi == 0.7


def test_unknown_protocol():
    with pytest.raises(ProtocolError):
        run_protocol("swap", 1)


@pytest.mark.parametrize("protocol", ["teleport", "qis1", "qis2"])
def test_outcomes_uniform(protocol, rng):
    dist = outcome_distribution(protocol, SecretState.random(rng))
    assert np.allclose(dist, 1.0 / len(dist))


def test_rsp_outcomes_sum_to_one():
    dist = outcome_distribution("rsp", SecretState.phase_family(1.3))
    assert len(dist) == 4
    assert dist.sum() == pytest.approx(1.0)


def test_rsp_basis_needs_phase_family():
    with pytest.raises(BasisError):
        rsp_basis(SecretState.basis(0))


def test_rsp_corrections_exist():
    assert all(rsp_correction(i).qubits == (3, 4) for i in range(4))


def test_completion_outcome_raises(rng):
    basis = complete_basis([Ket(np.array([1, 0]), (1,))], 2)
    with pytest.raises(CompletionOutcomeError):
        protocols._measure_listed(Ket(np.array([0, 1]), (1,)), basis, rng)


@pytest.mark.parametrize("protocol", ["teleport", "qis1", "qis2"])
def test_no_signaling(protocol, rng):
    distance = no_signaling_distance(protocol, SecretState.basis(0), SecretState.random(rng))
    assert distance == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("protocol", ["qis1", "qis2"])
def test_solo_guess_on_basis_payload(protocol):
    assert solo_guess_fidelity(protocol, SecretState.basis(0)) == pytest.approx(1.0)


def test_solo_guess_on_uniform_payload():
    secret = SecretState.from_vector([1, 1, 1, 1], normalize=True)
    assert solo_guess_fidelity("qis1", secret) == pytest.approx(0.25)
    assert solo_guess_fidelity("qis2", secret) == pytest.approx(0.5)


def test_solo_guess_only_for_splitting():
    with pytest.raises(ProtocolError):
        solo_guess_fidelity("teleport", SecretState.basis(0))


def test_dense_message_numbering():
    msg = DenseMessage.from_int(21)
    assert (msg.u1, msg.u2, msg.u3) == (2, 2, 1)
    assert msg.to_int() == 21
    assert msg.bits() == "10101"
    assert msg.operators() == ("Y", "Y", "X")


def test_dense_message_range():
    with pytest.raises(ValueError):
        DenseMessage(4, 0, 0)
    with pytest.raises(ValueError):
        DenseMessage.from_int(32)


def test_dense_message_one_flips_fourth_qubit():
    encoded = dense_encode(DenseMessage.from_int(1))
    expected = apply_operator(c6(), GATES["X"], (4,))
    assert fidelity_up_to_phase(encoded, expected) == pytest.approx(1.0)


def test_dense_codebook_decodes():
    for n in range(32):
        msg = DenseMessage.from_int(n)
        assert dense_decode(dense_encode(msg)) == msg


def test_dense_decode_permuted_register():
    codeword = dense_encode(DenseMessage.from_int(13))
    shuffled = permute(codeword, tuple(reversed(codeword.labels)))
    assert dense_decode(shuffled).to_int() == 13


def test_dense_decode_rejects_other_states():
    zero = Ket(np.eye(64)[0], c6().labels)
    with pytest.raises(NotACodewordError):
        dense_decode(zero)
    with pytest.raises(StateError):
        dense_decode(Ket(np.eye(64)[0], (1, 2, 3, 4, 5, 7)))


def test_capacity(channel):
    assert capacity(channel, {1, 6, 4}) == pytest.approx(5.0)
    assert capacity(ghz(2), {1}) == pytest.approx(2.0)
    product = Ket(np.eye(64)[0], channel.labels)
    assert capacity(product, {1, 6, 4}) == pytest.approx(3.0)


def test_capacity_needs_proper_subset(channel):
    with pytest.raises(StateError):
        capacity(channel, set())
    with pytest.raises(StateError):
        capacity(channel, set(channel.labels))


def test_rsp_basis_reuses_parsed_table(monkeypatch):
    rsp_basis(SecretState.phase_family(0.3))

    def fail(*args, **kwargs):
        raise AssertionError("table6 parsed again")

    monkeypatch.setattr(protocols, "load_table", fail)
    hits = bundled_table.cache_info().hits
    basis = rsp_basis(SecretState.phase_family(1.1))
    assert basis.matrix.shape == (16, 16)
    assert bundled_table.cache_info().hits == hits + 1


def test_first_splitting_layout_is_inferred_up_to_symmetry(tables, channel):
    table = tables["2"]
    report = infer_assignment(table)
    swap = {5: 6, 6: 5}
    assert report.layout.measured == tuple(swap.get(q, q) for q in QIS1_LAYOUT.measured)
    assert report.layout.printed == tuple(swap.get(q, q) for q in QIS1_LAYOUT.printed)
    assert report.score == TableOracle(table).score(QIS1_LAYOUT) == 11
    exchanged = permute(channel.relabel((1, 2, 3, 4, 6, 5)), channel.labels)
    assert fidelity_up_to_phase(exchanged, channel) == pytest.approx(1.0)
