import itertools

import numpy as np
import pytest

from c6proto.errors import LabelError, StateError
from c6proto.modules.qstate import (
    DensityMatrix,
    Ket,
    SecretState,
    apply_operator,
    c6,
    cluster_chain,
    ebits,
    entropy,
    fidelity_up_to_phase,
    ghz,
    ket_from_terms,
    max_bipartite_ebits,
    permute,
    reduced_density,
    tensor,
    trace_distance,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_c6_terms(channel):
    assert channel.labels == (1, 2, 3, 4, 5, 6)
    assert channel.is_normalized()
    assert [bits for _, bits in channel.terms()] == ["000000", "000111", "111000", "111111"]
    assert channel.amplitude("111111") == pytest.approx(-0.5)


def test_ket_rejects_bad_sizes():
    with pytest.raises(StateError):
        Ket(np.ones(3), (1, 2))
    with pytest.raises(LabelError):
        Ket(np.ones(4), (1, 1))


def test_ket_from_terms_rejects_duplicates():
    with pytest.raises(StateError):
        ket_from_terms([(1, "01"), (1, "01")])


def test_permute_moves_amplitudes():
    k = ket_from_terms([(1, "01")], labels=("x", "y"))
    swapped = permute(k, ("y", "x"))
    assert swapped.labels == ("y", "x")
    assert swapped.amplitude("10") == 1
    assert np.allclose(permute(swapped, ("x", "y")).amplitudes, k.amplitudes)


def test_tensor_label_collision():
    with pytest.raises(LabelError):
        tensor(ghz(2), ghz(2))


def test_tensor_big_endian():
    k = tensor(ket_from_terms([(1, "1")], labels=("a",)), ket_from_terms([(1, "0")], labels=("b",)))
    assert k.labels == ("a", "b")
    assert k.amplitude("10") == 1


def test_apply_operator_keeps_label_order():
    k = ket_from_terms([(1, "00")])
    out = apply_operator(k, X, (2,))
    assert out.labels == (1, 2)
    assert out.amplitude("01") == 1


def test_cluster_chain_two_sites():
    assert np.allclose(cluster_chain(2).amplitudes, np.array([1, 1, 1, -1]) / 2)


def test_reduced_density_of_c6_single_qubit(channel):
    rho = reduced_density(channel, (1,))
    assert np.allclose(rho.matrix, np.eye(2) / 2)


def test_entropy_and_ebits():
    assert entropy(np.eye(4) / 4) == pytest.approx(2.0)
    assert ebits(ghz(3), [1]) == pytest.approx(1.0)
    with pytest.raises(StateError):
        ebits(ghz(3), [1, 2, 3])


def test_c6_three_qubit_cuts_carry_two_ebits(channel):
    value, cut = max_bipartite_ebits(channel, 3)
    assert value == pytest.approx(2.0, abs=1e-10)
    assert len(cut) == 3


def test_fidelity_ignores_global_phase():
    k = ghz(2)
    assert fidelity_up_to_phase(k, Ket(1j * k.amplitudes, k.labels)) == pytest.approx(1.0)


def test_trace_distance_orthogonal_states():
    zero = DensityMatrix(np.diag([1, 0]), (1,))
    one = DensityMatrix(np.diag([0, 1]), (1,))
    assert trace_distance(zero, one) == pytest.approx(1.0)


def test_density_matrix_rejects_bad_trace():
    with pytest.raises(StateError):
        DensityMatrix(np.eye(2), (1,))


def test_secret_state():
    with pytest.raises(StateError):
        SecretState(1, 1, 0, 0)
    secret = SecretState.from_vector([1, 1, 1, 1], normalize=True)
    assert np.allclose(secret.vector, 0.5)
    assert np.allclose(SecretState.phase_family(0.0).vector, 0.5)
    assert secret.ket(("a", "b")).labels == ("a", "b")


def test_random_secret_is_seeded():
    a = SecretState.random(np.random.default_rng(3))
    b = SecretState.random(np.random.default_rng(3))
    assert a == b
    assert np.linalg.norm(a.vector) == pytest.approx(1.0)


def test_c6_single_qubit_cuts_are_maximally_mixed():
    for label in range(1, 7):
        assert ebits(c6(), [label]) == pytest.approx(1.0)


def random_ket(rng, labels):
    amps = rng.normal(size=2 ** len(labels)) + 1j * rng.normal(size=2 ** len(labels))
    return Ket(amps, tuple(labels)).normalized()


@pytest.mark.parametrize("size", [1, 2, 3])
def test_ebits_bounded_and_symmetric(rng, size):
    labels = (1, 2, 3, 4, 5, 6)
    for _ in range(5):
        k = random_ket(rng, labels)
        for part in itertools.combinations(labels, size):
            rest = [q for q in labels if q not in part]
            value = ebits(k, part)
            assert -1e-12 <= value <= min(size, 6 - size) + 1e-12
            assert value == pytest.approx(ebits(k, rest), abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_ghz_every_cut_is_one_ebit(n):
    k = ghz(n)
    for size in range(1, n):
        for part in itertools.combinations(k.labels, size):
            assert ebits(k, part) == pytest.approx(1.0, abs=1e-10)


def test_permute_inverse_restores_register(rng):
    k = random_ket(rng, (1, 2, 3, 4))
    moved = permute(k, (3, 1, 4, 2))
    assert moved.labels == (3, 1, 4, 2)
    back = permute(moved, k.labels)
    assert np.allclose(back.amplitudes, k.amplitudes)


def test_tensor_of_normalized_kets_is_normalized(rng):
    joined = tensor(random_ket(rng, ("a", "b")), random_ket(rng, (1, 2, 3)))
    assert joined.labels == ("a", "b", 1, 2, 3)
    assert joined.norm() == pytest.approx(1.0)


def test_c6_reduced_states(channel):
    assert np.allclose(reduced_density(channel, (3, 4)).matrix, np.eye(4) / 4)
    evals = np.sort(reduced_density(channel, (1, 2, 3)).eigenvalues())[::-1]
    assert np.allclose(evals, [0.5, 0.5, 0, 0, 0, 0, 0, 0], atol=1e-10)
    assert entropy(reduced_density(channel, (2, 3, 5))) == pytest.approx(2.0, abs=1e-10)
    assert ebits(channel, {3, 4}) == pytest.approx(2.0, abs=1e-10)


def test_three_site_cluster_single_cuts():
    k = cluster_chain(3)
    for q in (1, 2, 3):
        assert ebits(k, [q]) == pytest.approx(1.0, abs=1e-10)
