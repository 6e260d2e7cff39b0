"""Core linear algebra: propagators, evolution, fidelity.

Oracles: a high-order Taylor series for the matrix exponential, fine-step
Euler integration of the von Neumann commutator equation for evolution, and
scipy's Schur-based sqrtm for the fidelity formula.
"""

import numpy as np
import pytest
import scipy.linalg

from stprep.linalg import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    check_density_matrix,
    evolve,
    fidelity,
    hermitian_exp,
    pure_to_density,
    sqrtm_psd,
    tensor,
)


def taylor_expm(h, t, order=60):
    """Independent oracle: truncated series for exp(-i h t)."""
    a = -1j * np.asarray(h, dtype=complex) * t
    term = np.eye(h.shape[0], dtype=complex)
    total = term.copy()
    for k in range(1, order + 1):
        term = term @ a / k
        total += term
    return total


def euler_evolve(rho, h, t, n_steps=200_000):
    """Independent oracle: Euler integration of drho/dt = -i [h, rho]."""
    dt = t / n_steps
    r = np.asarray(rho, dtype=complex).copy()
    for _ in range(n_steps):
        r = r + dt * (-1j) * (h @ r - r @ h)
    return r


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def random_density(rng, dim):
    w = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = w @ w.conj().T
    return rho / np.trace(rho).real


class TestHermitianExp:
    def test_sigma_x_quarter_period(self):
        # exp(-i sx pi/2) = cos(pi/2) I - i sin(pi/2) sx = -i sx
        u = hermitian_exp(SIGMA_X, np.pi / 2)
        assert abs(u[0, 0]) < 1e-12
        assert abs(abs(u[0, 1]) - 1.0) < 1e-12
        np.testing.assert_allclose(u, -1j * SIGMA_X, atol=1e-12)
        np.testing.assert_allclose(u, taylor_expm(SIGMA_X, np.pi / 2), atol=1e-12)

    def test_zero_duration_is_identity(self):
        rng = np.random.default_rng(3)
        h = random_hermitian(rng, 4)
        np.testing.assert_allclose(hermitian_exp(h, 0.0), np.eye(4), atol=1e-12)

    def test_sigma_z_half_period(self):
        u = hermitian_exp(SIGMA_Z, np.pi)
        np.testing.assert_allclose(u, np.diag([-1.0, -1.0]), atol=1e-12)
        np.testing.assert_allclose(u, taylor_expm(SIGMA_Z, np.pi), atol=1e-12)

    def test_matches_taylor_oracle_on_random_matrices(self):
        rng = np.random.default_rng(11)
        for dim in (2, 4):
            for _ in range(20):
                h = random_hermitian(rng, dim)
                t = rng.uniform(0, 2 * np.pi)
                np.testing.assert_allclose(hermitian_exp(h, t), taylor_expm(h, t), atol=1e-9)

    def test_unitarity_over_random_ensemble(self):
        rng = np.random.default_rng(5)
        for dim in (2, 4):
            h = np.stack([random_hermitian(rng, dim) for _ in range(500)])
            t = rng.uniform(0, 2 * np.pi)
            u = hermitian_exp(h, t)
            defect = np.abs(u @ np.conj(np.swapaxes(u, -1, -2)) - np.eye(dim)).max()
            assert defect < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_exp(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)

    def test_rejects_non_finite_duration(self):
        with pytest.raises(ValueError):
            hermitian_exp(SIGMA_X, np.inf)


class TestEvolve:
    def test_eigenstate_is_stationary(self):
        rho = pure_to_density([1, 0])
        out = evolve(rho, SIGMA_Z, 1.3)
        np.testing.assert_allclose(out, rho, atol=1e-12)

    def test_rabi_flip(self):
        rho = pure_to_density([1, 0])
        out = evolve(rho, SIGMA_X, np.pi / 2)
        np.testing.assert_allclose(out, pure_to_density([0, 1]), atol=1e-12)
        oracle = euler_evolve(rho, SIGMA_X, np.pi / 2)
        np.testing.assert_allclose(out, oracle, atol=1e-4)

    def test_maximally_mixed_commutes_with_everything(self):
        rng = np.random.default_rng(7)
        rho = np.eye(2, dtype=complex) / 2
        out = evolve(rho, random_hermitian(rng, 2), rng.uniform(0, 5))
        np.testing.assert_allclose(out, rho, atol=1e-12)

    def test_semigroup_property(self):
        rng = np.random.default_rng(13)
        for _ in range(30):
            h = random_hermitian(rng, 2)
            rho = random_density(rng, 2)
            a, b = rng.uniform(0, 2, size=2)
            once = evolve(rho, h, a + b)
            twice = evolve(evolve(rho, h, a), h, b)
            np.testing.assert_allclose(once, twice, atol=1e-8)

    def test_preserves_trace_hermiticity_purity(self):
        rng = np.random.default_rng(17)
        for dim in (2, 4):
            for _ in range(200):
                psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
                rho = pure_to_density(psi)
                out = evolve(rho, random_hermitian(rng, dim), rng.uniform(0, 2 * np.pi))
                assert abs(np.trace(out).real - 1.0) < 1e-9
                assert np.abs(out - out.conj().T).max() < 1e-12
                assert abs(np.trace(out @ out).real - 1.0) < 1e-8


class TestFidelity:
    def test_self_fidelity_is_one(self):
        rng = np.random.default_rng(19)
        for dim in (2, 4):
            rho = random_density(rng, dim)
            assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_states(self):
        assert fidelity(pure_to_density([1, 0]), pure_to_density([0, 1])) == pytest.approx(0.0, abs=1e-9)

    def test_zero_vs_plus(self):
        plus = pure_to_density([1, 1])
        f = fidelity(pure_to_density([1, 0]), plus)
        assert f == pytest.approx(np.sqrt(2) / 2, abs=1e-9)

    def test_matches_scipy_oracle_on_mixed_states(self):
        rng = np.random.default_rng(23)
        for dim in (2, 4):
            for _ in range(50):
                a, b = random_density(rng, dim), random_density(rng, dim)
                sa = scipy.linalg.sqrtm(a)
                oracle = np.real(np.trace(scipy.linalg.sqrtm(sa @ b @ sa)))
                assert fidelity(a, b) == pytest.approx(oracle, abs=1e-7)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            a, b = random_density(rng, 2), random_density(rng, 2)
            fab, fba = fidelity(a, b), fidelity(b, a)
            assert abs(fab - fba) < 1e-8
            assert 0.0 <= fab <= 1.0

    def test_pure_pure_equals_overlap(self):
        rng = np.random.default_rng(31)
        for dim in (2, 4):
            for _ in range(50):
                u = rng.normal(size=dim) + 1j * rng.normal(size=dim)
                v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
                u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
                f = fidelity(pure_to_density(u), pure_to_density(v))
                assert f == pytest.approx(abs(np.vdot(u, v)), abs=1e-9)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            fidelity(np.eye(2) / 2, np.eye(4) / 4)

    def test_precomputed_sqrt_is_bit_identical(self):
        rng = np.random.default_rng(37)
        a, b = random_density(rng, 4), random_density(rng, 4)
        assert fidelity(a, b) == fidelity(a, b, sqrt_tar=sqrtm_psd(a))


class TestTensor:
    def test_identity(self):
        np.testing.assert_array_equal(tensor(IDENTITY_2, IDENTITY_2), np.eye(4))

    def test_sigma_z_with_identity(self):
        np.testing.assert_allclose(tensor(SIGMA_Z, IDENTITY_2), np.diag([1.0, 1.0, -1.0, -1.0]), atol=0)

    def test_involution(self):
        xx = tensor(SIGMA_X, SIGMA_X)
        np.testing.assert_allclose(xx @ xx, np.eye(4), atol=1e-15)


class TestChecks:
    def test_valid_density_matrix_passes(self):
        check_density_matrix(pure_to_density([1, 1j]))

    def test_bad_trace_rejected(self):
        with pytest.raises(ValueError):
            check_density_matrix(np.eye(2, dtype=complex))

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(ValueError):
            check_density_matrix(np.diag([1.5, -0.5]).astype(complex))

    def test_sqrtm_psd_squares_back(self):
        rng = np.random.default_rng(41)
        rho = random_density(rng, 4)
        s = sqrtm_psd(rho)
        np.testing.assert_allclose(s @ s, rho, atol=1e-10)
        np.testing.assert_allclose(
            s, scipy.linalg.sqrtm(rho), atol=1e-8
        )

    def test_sigma_y_convention(self):
        np.testing.assert_array_equal(SIGMA_Y, np.array([[0, -1j], [1j, 0]]))
