"""Exact small-dimension complex linear algebra for qubit density matrices.

Everything here operates on plain ``numpy`` arrays of dtype complex128:
density matrices are (d, d) Hermitian unit-trace PSD arrays, pure states
are unit-norm (d,) vectors, with d = 2 or 4. All functions are pure.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "IDENTITY_2",
    "tensor",
    "pure_to_density",
    "require_hermitian",
    "check_density_matrix",
    "hermitian_exp",
    "evolve",
    "sqrtm_psd",
    "fidelity",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

# Eigenvalues of unit-trace PSD matrices below this are numerical noise from
# eigh; zeroing them keeps sqrt() from amplifying ~1e-16 junk into ~1e-8.
_EIG_FLOOR = 1e-14

HERMITICITY_TOL = 1e-9


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor as the most significant index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def pure_to_density(psi) -> np.ndarray:
    """Projector |psi><psi| of a pure state vector (normalized first)."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError("pure state must have finite nonzero norm")
    v = v / norm
    return np.outer(v, v.conj())


def require_hermitian(h: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Return ``h`` as a complex array, raising if it is not Hermitian within tol."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h.view(float))):
        raise ValueError("matrix has non-finite entries")
    defect = np.abs(h - h.conj().T).max()
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian (max |H - H^dag| = {defect:.3e})")
    return h


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Validate Hermiticity, unit trace, and positivity of a density matrix."""
    rho = require_hermitian(rho, tol)
    trace_err = abs(np.trace(rho).real - 1.0)
    if trace_err > tol:
        raise ValueError(f"density matrix trace deviates from 1 by {trace_err:.3e}")
    min_eig = np.linalg.eigvalsh(rho).min()
    if min_eig < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3e}")
    return rho


def hermitian_exp(h: np.ndarray, t: float) -> np.ndarray:
    """Propagator exp(-i*h*t) of a Hermitian generator, via spectral decomposition.

    Supports stacked input of shape (..., d, d); the result is unitary to
    machine precision because the eigenvalues are real.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim == 2:
        require_hermitian(h)
    else:
        defect = np.abs(h - np.conj(np.swapaxes(h, -1, -2))).max()
        if defect > HERMITICITY_TOL:
            raise ValueError(f"stacked matrices not Hermitian (defect {defect:.3e})")
    if not np.isfinite(t):
        raise ValueError("duration must be finite")
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * w * t)
    return (v * phase[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def evolve(rho: np.ndarray, h: np.ndarray, dt: float, propagator: np.ndarray | None = None) -> np.ndarray:
    """One rectangular pulse: rho -> U rho U^dag with U = exp(-i*h*dt).

    The result is re-symmetrized to (r + r^dag)/2 to cap floating-point
    Hermiticity drift over multi-step episodes. ``propagator`` may carry a
    precomputed hermitian_exp(h, dt) for hot loops; it must match (h, dt).
    """
    u = hermitian_exp(h, dt) if propagator is None else propagator
    r = u @ np.asarray(rho, dtype=complex) @ u.conj().T
    return 0.5 * (r + r.conj().T)


def sqrtm_psd(x: np.ndarray) -> np.ndarray:
    """Hermitian PSD matrix square root; tiny/negative eigenvalues clamped to 0."""
    w, v = np.linalg.eigh(np.asarray(x, dtype=complex))
    w = np.where(w < _EIG_FLOOR, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho_tar: np.ndarray, rho: np.ndarray, sqrt_tar: np.ndarray | None = None) -> float:
    """Uhlmann root fidelity Tr sqrt(sqrt(rho_tar) rho sqrt(rho_tar)), in [0, 1].

    For a pure target |psi><psi| this equals sqrt(<psi|rho|psi>). ``sqrt_tar``
    may carry a precomputed sqrtm_psd(rho_tar) when the target is fixed
    across many calls (it is bit-identical to recomputing).
    """
    rho_tar = np.asarray(rho_tar, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho_tar.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {rho_tar.shape} vs {rho.shape}")
    s = sqrtm_psd(rho_tar) if sqrt_tar is None else sqrt_tar
    w = np.linalg.eigvalsh(s @ rho @ s)
    w = np.where(w < _EIG_FLOOR, 0.0, w)
    f = float(np.sqrt(w).sum())
    return min(max(f, 0.0), 1.0)
