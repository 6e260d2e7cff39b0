"""Informationally complete POVM codec between density matrices and probabilities.

The single-qubit set is the Pauli-4 POVM: one-third-weighted projectors onto
|0>, the circular state |l> = (|0> + i|1>)/sqrt(2) (convention fixed here),
and |+> = (|0> + |1>)/sqrt(2), plus the remainder operator that completes the
identity. Multi-qubit sets are elementwise tensor products, indexed with the
qubit-1 outcome as the most significant base-4 digit.

A density matrix maps to outcome probabilities P(a) = Tr[rho M(a)]; the
inverse uses the cached overlap matrix T[a,b] = Tr[M(a) M(b)]:

    rho = sum_ab P(a) Tinv[a,b] M(b)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import tensor

__all__ = ["PovmSet", "pauli4_single", "tensor_povm", "measure", "reconstruct"]


@dataclass(frozen=True)
class PovmSet:
    """Immutable operator set with cached overlap matrix and its inverse."""

    operators: np.ndarray  # (n_outcomes, d, d) complex
    overlap: np.ndarray  # (n_outcomes, n_outcomes) real
    overlap_inv: np.ndarray

    @property
    def n_outcomes(self) -> int:
        return self.operators.shape[0]

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1


def _build(operators: np.ndarray) -> PovmSet:
    """Validate operators, cache T and its inverse."""
    ops = np.asarray(operators, dtype=complex)
    dim = ops.shape[1]
    for m in ops:
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("POVM operator is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise ValueError("POVM operator is not positive semi-definite")
    completeness = np.abs(ops.sum(axis=0) - np.eye(dim)).max()
    if completeness > 1e-12:
        raise ValueError(f"POVM operators do not sum to identity (defect {completeness:.3e})")
    overlap = np.real(np.einsum("aij,bji->ab", ops, ops))
    overlap_inv = np.linalg.inv(overlap)
    if np.abs(overlap @ overlap_inv - np.eye(len(ops))).max() > 1e-9:
        raise ValueError("overlap matrix is not invertible: set is not informationally complete")
    ops.setflags(write=False)
    overlap.setflags(write=False)
    overlap_inv.setflags(write=False)
    return PovmSet(operators=ops, overlap=overlap, overlap_inv=overlap_inv)


def pauli4_single() -> PovmSet:
    """The four-outcome single-qubit IC-POVM described in the module docstring."""
    ket0 = np.array([1.0, 0.0], dtype=complex)
    ket1 = np.array([0.0, 1.0], dtype=complex)
    ket_l = (ket0 + 1j * ket1) / np.sqrt(2.0)
    ket_plus = (ket0 + ket1) / np.sqrt(2.0)
    m1 = np.outer(ket0, ket0.conj()) / 3.0
    m2 = np.outer(ket_l, ket_l.conj()) / 3.0
    m3 = np.outer(ket_plus, ket_plus.conj()) / 3.0
    m4 = np.eye(2, dtype=complex) - m1 - m2 - m3
    return _build(np.stack([m1, m2, m3, m4]))


def tensor_povm(base: PovmSet, n_qubits: int) -> PovmSet:
    """Tensor-product set over ``n_qubits``; index = 4*a1 + a2 for two qubits."""
    if n_qubits == 1:
        return base
    if n_qubits != 2:
        raise ValueError(f"unsupported qubit count {n_qubits}")
    ops = np.stack(
        [tensor(base.operators[a1], base.operators[a2])
         for a1 in range(base.n_outcomes)
         for a2 in range(base.n_outcomes)]
    )
    return _build(ops)


def measure(rho: np.ndarray, povm: PovmSet) -> np.ndarray:
    """Outcome probabilities Tr[rho M(a)] as a real vector."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (povm.dim, povm.dim):
        raise ValueError(f"state dimension {rho.shape} does not match POVM dim {povm.dim}")
    traces = np.einsum("aij,ji->a", povm.operators, rho)
    max_imag = np.abs(traces.imag).max()
    if max_imag > 1e-10:
        raise ValueError(f"non-negligible imaginary outcome probability ({max_imag:.3e})")
    return traces.real


def measure_batch(rhos: np.ndarray, povm: PovmSet) -> np.ndarray:
    """Vectorized measure() over stacked (n, d, d) density matrices."""
    return np.real(np.einsum("aij,nji->na", povm.operators, rhos))


def reconstruct(p: np.ndarray, povm: PovmSet) -> np.ndarray:
    """Invert measure(): density matrix from an outcome probability vector."""
    p = np.asarray(p, dtype=float)
    if p.shape != (povm.n_outcomes,):
        raise ValueError(f"probability vector length {p.shape} does not match {povm.n_outcomes} outcomes")
    rho = np.einsum("a,ab,bij->ij", p, povm.overlap_inv, povm.operators)
    return 0.5 * (rho + rho.conj().T)
