"""POVM codec: operator set construction, measurement, reconstruction."""

import numpy as np
import pytest

from stprep.linalg import pure_to_density, tensor
from stprep.povm import measure, measure_batch, pauli4_single, reconstruct, tensor_povm


def random_density(rng, dim):
    w = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = w @ w.conj().T
    return rho / np.trace(rho).real


@pytest.fixture(scope="module")
def povm1():
    return pauli4_single()


@pytest.fixture(scope="module")
def povm2(povm1):
    return tensor_povm(povm1, 2)


class TestPauli4:
    def test_operators_sum_to_identity(self, povm1):
        np.testing.assert_allclose(povm1.operators.sum(axis=0), np.eye(2), atol=1e-15)

    def test_first_operator_trace(self, povm1):
        assert np.trace(povm1.operators[0]).real == pytest.approx(1 / 3, abs=1e-15)

    def test_remainder_operator_eigenvalues(self, povm1):
        eigs = np.linalg.eigvalsh(povm1.operators[3])
        expected = [0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6]
        np.testing.assert_allclose(eigs, expected, atol=1e-12)

    def test_all_operators_psd(self, povm1):
        for m in povm1.operators:
            assert np.linalg.eigvalsh(m).min() >= -1e-12

    def test_overlap_inverse_cached(self, povm1):
        np.testing.assert_allclose(
            povm1.overlap @ povm1.overlap_inv, np.eye(4), atol=1e-12
        )

    def test_circular_state_convention(self, povm1):
        # second operator projects onto (|0> + i|1>)/sqrt(2)
        ket_l = np.array([1.0, 1.0j]) / np.sqrt(2)
        np.testing.assert_allclose(povm1.operators[1], np.outer(ket_l, ket_l.conj()) / 3, atol=1e-15)


class TestTensorPovm:
    def test_single_qubit_passthrough(self, povm1):
        assert tensor_povm(povm1, 1) is povm1

    def test_two_qubit_normalization(self, povm2):
        assert povm2.n_outcomes == 16
        np.testing.assert_allclose(povm2.operators.sum(axis=0), np.eye(4), atol=1e-12)

    def test_overlap_factorizes(self, povm1, povm2):
        np.testing.assert_allclose(
            povm2.overlap, np.kron(povm1.overlap, povm1.overlap), atol=1e-12
        )

    def test_index_order_qubit1_most_significant(self, povm1, povm2):
        for a1 in (0, 2):
            for a2 in (1, 3):
                np.testing.assert_allclose(
                    povm2.operators[4 * a1 + a2],
                    tensor(povm1.operators[a1], povm1.operators[a2]),
                    atol=1e-15,
                )

    def test_unsupported_count_rejected(self, povm1):
        with pytest.raises(ValueError):
            tensor_povm(povm1, 3)


class TestMeasure:
    def test_maximally_mixed(self, povm1):
        p = measure(np.eye(2, dtype=complex) / 2, povm1)
        np.testing.assert_allclose(p, [1 / 6, 1 / 6, 1 / 6, 1 / 2], atol=1e-15)

    def test_ground_state(self, povm1):
        p = measure(pure_to_density([1, 0]), povm1)
        np.testing.assert_allclose(p, [1 / 3, 1 / 6, 1 / 6, 1 / 3], atol=1e-15)

    def test_probabilities_sum_to_one(self, povm1, povm2):
        rng = np.random.default_rng(0)
        for povm, dim in ((povm1, 2), (povm2, 4)):
            for _ in range(50):
                p = measure(random_density(rng, dim), povm)
                assert p.sum() == pytest.approx(1.0, abs=1e-9)
                assert p.min() >= -1e-12

    def test_dimension_mismatch_rejected(self, povm1):
        with pytest.raises(ValueError):
            measure(np.eye(4, dtype=complex) / 4, povm1)

    def test_batch_agrees_with_scalar(self, povm2):
        rng = np.random.default_rng(1)
        rhos = np.stack([random_density(rng, 4) for _ in range(10)])
        batch = measure_batch(rhos, povm2)
        for i in range(10):
            np.testing.assert_allclose(batch[i], measure(rhos[i], povm2), atol=1e-15)


class TestReconstruct:
    def test_round_trip_excited_state(self, povm1):
        rho = pure_to_density([0, 1])
        np.testing.assert_allclose(reconstruct(measure(rho, povm1), povm1), rho, atol=1e-12)

    def test_maximally_mixed_from_probabilities(self, povm1):
        rho = reconstruct(np.array([1 / 6, 1 / 6, 1 / 6, 1 / 2]), povm1)
        np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-12)

    def test_round_trip_random_states(self, povm1, povm2):
        rng = np.random.default_rng(2)
        for povm, dim in ((povm1, 2), (povm2, 4)):
            worst = 0.0
            for _ in range(200):
                rho = random_density(rng, dim)
                err = np.abs(reconstruct(measure(rho, povm), povm) - rho).max()
                worst = max(worst, err)
            assert worst < 1e-9

    def test_length_mismatch_rejected(self, povm2):
        with pytest.raises(ValueError):
            reconstruct(np.ones(4) / 4, povm2)
