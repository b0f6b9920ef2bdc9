import dataclasses

import numpy as np
import pytest

from c6proto.errors import BasisError, SynthesisError
from c6proto.modules.qstate import Ket, SecretState, fidelity_up_to_phase
from c6proto.modules.synth import (
    CZ,
    LocalOp,
    complete_basis,
    infer_assignment,
    synthesize_correction,
    word_matrix,
)
from c6proto.modules.tables import Row, load_source_table


def test_word_matrix():
    assert np.allclose(word_matrix("HH"), np.eye(2))
    assert np.allclose(word_matrix("SS"), word_matrix("Z"))
    with pytest.raises(SynthesisError):
        word_matrix("Q")


def test_local_op_describe():
    assert LocalOp((3, 4)).describe() == "I"
    assert LocalOp((3, 4), cz=True).describe() == "CZ"
    assert LocalOp((3, 4), ("X", "Z")).describe() == "X⊗Z"
    assert LocalOp((3, 4), ("X", "X"), "CX21", phase=-1).describe() == "-1 · X⊗X · CX21"


def test_local_op_matrix_order():
    op = LocalOp((3, 4), ("Z", "I"), cz=True)
    expected = CZ @ np.kron(word_matrix("Z"), np.eye(2))
    assert np.allclose(op.matrix(), expected)


def test_local_op_rejects_bad_input():
    with pytest.raises(SynthesisError):
        LocalOp((3, 4, 5), ("I", "I"))
    with pytest.raises(SynthesisError):
        LocalOp((3, 4), linear="CX99")


def test_local_op_applies_in_register_order():
    op = LocalOp((3, 4), ("X", "I"))
    ket = Ket(np.array([1, 0, 0, 0]), (4, 3))
    out = op.apply(ket)
    assert out.labels == (4, 3)
    assert np.allclose(out.amplitudes, [0, 1, 0, 0])


def test_synthesize_from_kets():
    residual = Ket(np.array([0, 0, 1, 0]), (3, 4))
    target = Ket(np.array([1, 0, 0, 0]), (3, 4))
    op = synthesize_correction(residual, target)
    assert op.factors == ("X", "I")
    assert op.linear == "I"
    assert not op.cz


def test_synthesize_controlled_phase():
    def residual(secret):
        return Ket(CZ @ secret.vector, (3, 4))

    op = synthesize_correction(residual, lambda s: s.ket((3, 4)))
    assert op.describe() == "CZ"


def test_synthesize_cyclic_shift(rng):
    def residual(secret):
        return Ket(np.roll(secret.vector, 1), (3, 4))

    def target(secret):
        return secret.ket((3, 4))

    op = synthesize_correction(residual, target)
    assert op.linear == "CX21"
    assert op.factors == ("X", "X")
    for _ in range(5):
        secret = SecretState.random(rng)
        assert fidelity_up_to_phase(op.apply(residual(secret)), target(secret)) == pytest.approx(1.0)


def test_synthesize_shape_mismatch():
    with pytest.raises(SynthesisError):
        synthesize_correction(Ket(np.array([1, 0, 0, 0]), (3, 4)), Ket(np.array([1, 0]), (3,)))


def test_synthesize_needs_two_qubits():
    with pytest.raises(SynthesisError):
        synthesize_correction(Ket(np.array([1, 0]), (3,)), Ket(np.array([0, 1]), (3,)))


def test_complete_basis():
    plus = Ket(np.array([1, 1]) / np.sqrt(2), (1,))
    basis = complete_basis([plus], 2)
    assert basis.is_full
    assert basis.listed == 1
    assert basis.is_completion(1)
    assert np.allclose(basis.matrix @ basis.matrix.conj().T, np.eye(2))
    assert abs(np.vdot(basis.matrix[1], [1, -1])) == pytest.approx(np.sqrt(2))


def test_complete_basis_rejects_overlapping_vectors():
    zero = Ket(np.array([1, 0]), (1,))
    plus = Ket(np.array([1, 1]) / np.sqrt(2), (1,))
    with pytest.raises(BasisError):
        complete_basis([zero, plus], 2)


def test_complete_basis_dimension():
    with pytest.raises(BasisError):
        complete_basis([], 3)


def test_infer_bob_table(tables):
    table = tables["3"]
    report = infer_assignment(table, source_table=load_source_table(table))
    assert report.score == 4
    assert report.verdict == "consistent"
    assert report.matched_rows == [1, 2, 3, 4]


def test_infer_teleport_table(tables):
    report = infer_assignment(tables["1"])
    assert report.score >= 10
    assert set(report.layout.assignment.labels("bob")) == {3, 4}
    assert report.candidates > 1000
    assert report.to_dict()["score"] == report.score


def test_infer_shuffled_teleport_table_is_inconsistent(tables):
    table = tables["1"]
    rows = table.rows
    shuffled = dataclasses.replace(table, rows=tuple(
        Row(row.index, row.outcome, rows[-1 - n].result) for n, row in enumerate(rows)
    ))
    report = infer_assignment(shuffled)
    assert report.score < len(rows)
    assert report.verdict == "inconsistent"


def test_infer_first_splitting_table(tables):
    report = infer_assignment(tables["2"])
    assert report.stated_score == 0
    assert report.score == 11
    assert report.layout.encoding() == ("b", "a", "1", "5", "|", "3", "6", "2", "4")
    assert report.verdict == "inconsistent"
    assert report.to_dict()["stated"]["score"] == 0


def test_infer_second_splitting_table_repairs_stated_split(tables):
    report = infer_assignment(tables["4"])
    assert report.score == 16
    assert report.stated_score < 16
    assert report.verdict == "repaired"
