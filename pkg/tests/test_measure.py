import numpy as np
import pytest

from c6proto.errors import BasisError, DecompositionError, MeasurementError
from c6proto.modules.measure import (
    QIS1_BELL_NOTE,
    QIS2_GHZ_DECOMPOSITION,
    TELEPORT_BELL_DECOMPOSITION,
    BellConvention,
    MeasurementBasis,
    check_decomposition,
    check_orthonormal,
    expand_product_decomposition,
    measure,
    outcome_probabilities,
    partial_inner,
    project,
)
from c6proto.modules.protocols import joint_state, teleport_basis
from c6proto.modules.qstate import Ket, SecretState, ghz, ket_from_terms

SQRT_HALF = 1 / np.sqrt(2)


def computational(labels):
    return MeasurementBasis(tuple(labels), np.eye(2 ** len(labels)), "z")


def test_partial_inner_on_c6(channel):
    residual = partial_inner(channel, ket_from_terms([(1, "000")]), (1, 2, 3))
    assert residual.labels == (4, 5, 6)
    assert np.allclose(residual.amplitudes, 0.5 * ghz(3).amplitudes * np.sqrt(2))


def test_project_normalizes_residual(channel):
    prob, residual = project(channel, ket_from_terms([(1, "000")]), (1, 2, 3))
    assert prob == pytest.approx(0.5)
    assert np.allclose(residual.amplitudes, ghz(3).amplitudes)


def test_project_below_floor_returns_none():
    prob, residual = project(ket_from_terms([(1, "0")]), ket_from_terms([(1, "1")]))
    assert prob == 0.0
    assert residual is None


def test_measure_needs_full_basis(rng):
    partial = MeasurementBasis((1,), np.array([[1, 0]]), "partial")
    with pytest.raises(MeasurementError):
        measure(ket_from_terms([(1, "0")]), partial, rng)


def test_measure_collapses(rng):
    outcome = measure(ket_from_terms([(1, "10")]), computational((1,)), rng)
    assert outcome.index == 1
    assert outcome.probability == pytest.approx(1.0)
    assert outcome.residual.labels == (2,)
    assert outcome.residual.amplitude("0") == pytest.approx(1.0)


def test_outcome_probabilities_sum_to_one(channel):
    probs = outcome_probabilities(channel, computational((1, 2)))
    assert np.allclose(probs, [0.5, 0, 0, 0.5])


def test_basis_rejects_wrong_dimension():
    with pytest.raises(BasisError):
        MeasurementBasis((1, 2), np.eye(2))
    with pytest.raises(BasisError):
        MeasurementBasis.from_kets([ghz(2), ghz(3)])


def test_check_orthonormal_flags_overlap():
    basis = MeasurementBasis((1,), np.array([[1, 0], [SQRT_HALF, SQRT_HALF]]))
    report = check_orthonormal(basis)
    assert not report.passed
    assert report.worst_pair == (0, 1)
    assert report.max_off_diagonal == pytest.approx(SQRT_HALF)


def test_bell_conventions():
    standard = BellConvention.standard()
    assert standard.psi_plus.amplitude("00") == pytest.approx(SQRT_HALF)
    assert standard.phi_minus.amplitude("10") == pytest.approx(-SQRT_HALF)
    swapped = BellConvention.swapped()
    assert swapped.psi_plus.amplitude("01") == pytest.approx(SQRT_HALF)


def test_expand_simple_products():
    assert expand_product_decomposition("|0>|1>").amplitude("01") == 1
    k = expand_product_decomposition("½(|00> + |11>)")
    assert np.allclose(k.amplitudes, ghz(2).amplitudes)
    assert np.allclose(expand_product_decomposition("|ψ+>").amplitudes, ghz(2).amplitudes)


def test_expand_rejects_bad_expressions():
    with pytest.raises(DecompositionError):
        expand_product_decomposition("|00> + |1>")
    with pytest.raises(DecompositionError):
        expand_product_decomposition("(|0>")
    with pytest.raises(DecompositionError):
        expand_product_decomposition("|chi>")


def test_ghz_decomposition_matches_first_splitting_row(tables):
    table = tables["4"]
    target = Ket(table.outcome_vector(table.row(1)), (1, 2, 3, 4, 5))
    verdicts = check_decomposition(QIS2_GHZ_DECOMPOSITION, target)
    assert all(v.matches for v in verdicts)


def test_decompositions_are_reported_per_convention(tables):
    table = tables["2"]
    target = Ket(table.outcome_vector(table.row(1)), (1, 2, 3, 4))
    verdicts = check_decomposition(QIS1_BELL_NOTE, target)
    assert [v.convention for v in verdicts] == ["standard", "swapped"]
    assert all(0.0 <= v.fidelity <= 1.0 for v in verdicts)
    assert expand_product_decomposition(TELEPORT_BELL_DECOMPOSITION).n_qubits == 6


def test_teleport_decomposition_matches_only_standard_convention(tables):
    table = tables["1"]
    target = Ket(table.outcome_vector(table.row(1)), (1, 2, 3, 4, 5, 6))
    standard, swapped = check_decomposition(TELEPORT_BELL_DECOMPOSITION, target)
    assert standard.convention == "standard" and standard.matches
    assert standard.fidelity == pytest.approx(1.0)
    assert swapped.convention == "swapped" and not swapped.matches
    assert swapped.fidelity == pytest.approx(0.0, abs=1e-12)


def test_teleport_outcome_frequencies(rng):
    basis = teleport_basis()
    state = joint_state(SecretState.from_vector([1, 2j, -1, 0.5], normalize=True))
    counts = np.zeros(len(basis), dtype=int)
    for _ in range(16000):
        counts[measure(state, basis, rng).index] += 1
    sigma = np.sqrt(16000 * (1 / 16) * (15 / 16))
    assert np.all(np.abs(counts[:16] - 1000) <= 5 * sigma)
    assert counts[16:].sum() == 0


def test_teleport_listed_outcomes_are_uniform(rng):
    basis = teleport_basis()
    for _ in range(20):
        probs = outcome_probabilities(joint_state(SecretState.random(rng)), basis)
        assert np.allclose(probs[:16], 1 / 16, atol=1e-12)
        assert probs[16:].sum() == pytest.approx(0.0, abs=1e-12)


def test_completion_vector_is_never_observed(rng):
    basis = teleport_basis()
    assert basis.is_completion(20)
    prob, residual = project(joint_state(SecretState.random(rng)), basis.ket(20))
    assert prob == pytest.approx(0.0, abs=1e-12)
    assert residual is None
