"""Control Hamiltonian builders, action tables, noise sampling."""

import math

import numpy as np
import pytest

from stprep.hamiltonians import (
    ActionTable,
    NoiseSample,
    SingleQubitControls,
    TwoQubitControls,
    action_table_single,
    action_table_two,
    sample_noise,
    single_qubit_hamiltonian,
    two_qubit_hamiltonian,
    zero_noise,
)

SZ = np.diag([1.0, -1.0])
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
I2 = np.eye(2)


def expand_two_qubit(j1, j2, j12, h1, h2):
    """Independent elementwise expansion of the coupled-qubit matrix.

    Basis index 2*a1 + a2 with qubit 1 the most significant digit; matrix
    elements assembled from single-qubit elements, no Kronecker calls.
    """
    h = np.zeros((4, 4), dtype=complex)
    zm = SZ - I2
    for a1 in range(2):
        for a2 in range(2):
            for b1 in range(2):
                for b2 in range(2):
                    row, col = 2 * a1 + a2, 2 * b1 + b2
                    val = (
                        j1 * SZ[a1, b1] * I2[a2, b2]
                        + j2 * I2[a1, b1] * SZ[a2, b2]
                        + (j12 / 2.0) * zm[a1, b1] * zm[a2, b2]
                        + h1 * SX[a1, b1] * I2[a2, b2]
                        + h2 * I2[a1, b1] * SX[a2, b2]
                    )
                    h[row, col] = 0.5 * val
    return h


class TestSingleQubit:
    def test_unit_controls(self):
        h = single_qubit_hamiltonian(SingleQubitControls(1.0))
        np.testing.assert_array_equal(h.real, [[1, 1], [1, -1]])

    def test_zero_exchange_is_sigma_x(self):
        h = single_qubit_hamiltonian(SingleQubitControls(0.0))
        np.testing.assert_array_equal(h.real, SX)

    def test_noisy_build(self):
        h = single_qubit_hamiltonian(
            SingleQubitControls(2.0), NoiseSample((0.1,), (-0.05,))
        )
        np.testing.assert_allclose(h.real, [[2.1, 0.95], [0.95, -2.1]], atol=0)
        np.testing.assert_allclose(
            np.linalg.eigvalsh(h), [-np.hypot(2.1, 0.95), np.hypot(2.1, 0.95)], atol=1e-12
        )

    def test_exactly_hermitian(self):
        h = single_qubit_hamiltonian(SingleQubitControls(3.0), NoiseSample((0.2,), (0.3,)))
        np.testing.assert_array_equal(h, h.conj().T)

    def test_negative_exchange_rejected(self):
        with pytest.raises(ValueError):
            SingleQubitControls(-0.1)


class TestTwoQubit:
    def test_unit_controls_diagonal(self):
        h = two_qubit_hamiltonian(TwoQubitControls(1.0, 1.0))
        np.testing.assert_allclose(np.diag(h).real, [1.0, 0.0, 0.0, -0.5], atol=1e-15)
        off = h - np.diag(np.diag(h))
        nonzero = off[np.abs(off) > 1e-15]
        np.testing.assert_allclose(nonzero.real, 0.5, atol=1e-15)

    def test_zero_couplings(self):
        h = two_qubit_hamiltonian(TwoQubitControls(0.0, 0.0))
        expected = 0.5 * (np.kron(SX, I2) + np.kron(I2, SX))
        np.testing.assert_allclose(h.real, expected, atol=0)

    def test_default_coupling_product_rule(self):
        c = TwoQubitControls(2.0, 3.0)
        assert c.coupling == 3.0

    def test_explicit_coupling_kept(self):
        c = TwoQubitControls(2.0, 3.0, coupling=1.0)
        assert c.coupling == 1.0

    def test_matches_elementwise_expansion_for_all_actions(self):
        table = action_table_two()
        for i, c in enumerate(table.actions):
            h = two_qubit_hamiltonian(c)
            oracle = expand_two_qubit(c.exchange1, c.exchange2, c.coupling, 1.0, 1.0)
            assert np.abs(h - oracle).max() < 1e-12, f"action {i}"

    def test_noise_enters_per_qubit(self):
        noise = NoiseSample((0.1, -0.2), (0.05, 0.0))
        h = two_qubit_hamiltonian(TwoQubitControls(1.0, 2.0), noise)
        oracle = expand_two_qubit(1.1, 1.8, 1.0, 1.05, 1.0)
        np.testing.assert_allclose(h, oracle, atol=1e-15)

    def test_noise_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            two_qubit_hamiltonian(TwoQubitControls(1.0, 1.0), zero_noise(1))


class TestActionTables:
    def test_single_qubit_table(self):
        table = action_table_single()
        assert len(table) == 5
        assert table.actions[3].exchange == 3.0
        assert table.dt == pytest.approx(math.pi / 5)
        assert [c.exchange for c in table.actions] == [0.0, 1.0, 2.0, 3.0, 4.0]

    def test_two_qubit_table_row_major(self):
        table = action_table_two()
        assert len(table) == 36
        assert (table.actions[0].exchange1, table.actions[0].exchange2) == (0.0, 0.0)
        assert (table.actions[35].exchange1, table.actions[35].exchange2) == (5.0, 5.0)
        assert table.dt == pytest.approx(math.pi / 4)
        for i in range(6):
            for j in range(6):
                c = table.actions[6 * i + j]
                assert (c.exchange1, c.exchange2) == (float(i), float(j))

    def test_restricted_variant(self):
        table = action_table_two(restricted=True)
        assert len(table) == 25
        values = {(c.exchange1, c.exchange2) for c in table.actions}
        assert values == {(float(i), float(j)) for i in range(1, 6) for j in range(1, 6)}

    def test_index_round_trip_is_bijective(self):
        for table in (action_table_single(), action_table_two(), action_table_two(True)):
            keys = [
                (c.exchange,) if hasattr(c, "exchange") else (c.exchange1, c.exchange2)
                for c in table.actions
            ]
            assert len(set(keys)) == len(table)

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            ActionTable(actions=(), dt=0.1)

    def test_nonpositive_duration_rejected(self):
        with pytest.raises(ValueError):
            ActionTable(actions=(SingleQubitControls(1.0),), dt=0.0)


class TestNoiseSampling:
    def test_zero_amplitude_is_identity_perturbation(self):
        rng = np.random.default_rng(0)
        n = sample_noise(0.0, 0.0, 2, rng)
        assert n.delta_z == (0.0, 0.0) and n.delta_x == (0.0, 0.0)
        c = TwoQubitControls(2.0, 3.0)
        clean = two_qubit_hamiltonian(c)
        noisy = two_qubit_hamiltonian(c, n)
        np.testing.assert_array_equal(clean, noisy)

    def test_range_bound(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            n = sample_noise(0.1, 0.02, 2, rng)
            assert all(abs(v) <= 0.1 for v in n.delta_z)
            assert all(abs(v) <= 0.02 for v in n.delta_x)

    def test_mean_converges_to_zero(self):
        # uniform on [-0.1, 0.1]: std of the mean of 1e5 draws ~ 1.8e-4
        rng = np.random.default_rng(2)
        draws = np.array([sample_noise(0.1, 0.1, 1, rng).delta_z[0] for _ in range(100_000)])
        assert abs(draws.mean()) < 0.002

    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValueError):
            sample_noise(-0.1, 0.0, 1, np.random.default_rng(0))

    def test_per_qubit_entries(self):
        rng = np.random.default_rng(3)
        n = sample_noise(0.5, 0.5, 2, rng)
        assert n.qubits == 2
        assert n.delta_z[0] != n.delta_z[1]
