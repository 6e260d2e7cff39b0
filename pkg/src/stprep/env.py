"""Pulse-design environment: POVM state encoding, step dynamics, episodes.

The agent observes s = [P_cur, P_tar] (outcome probabilities of the current
and target states), picks a pulse index, and receives the post-pulse root
fidelity to the target as reward. Episodes end when the fidelity crosses the
configured threshold or the step budget runs out.

The pulse sequence a rollout DESIGNS for a task is the prefix of the played
trajectory that ends at its closest approach to the target (driving past
the best point would only degrade the preparation), so episode records carry
both the raw endpoint fidelity and the best-prefix fidelity; evaluation
metrics quote the latter.

``run_episode`` is the per-task reference rollout. ``rollout_batch`` plays
many tasks in lockstep through stacked array operations; it makes identical
greedy decisions and exists because full-test-set evaluation and noise
sweeps are far too slow one task at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .agent import EpsilonSchedule, select_action
from .hamiltonians import ActionTable, NoiseSample, sample_noise, zero_noise
from .linalg import evolve, fidelity, hermitian_exp, sqrtm_psd
from .network import MlpNetwork, forward
from .povm import PovmSet, measure, measure_batch

__all__ = [
    "StepOutcome",
    "EpisodeRecord",
    "encode",
    "env_step",
    "run_episode",
    "rollout_batch",
    "BatchRollout",
]


class StepOutcome(NamedTuple):
    encoding_next: np.ndarray
    reward: float
    fidelity: float
    done_threshold: bool
    done_timeout: bool


@dataclass
class EpisodeRecord:
    """Trajectory telemetry for one played task.

    ``best_fidelity`` is the fidelity of the designed pulse sequence: the
    maximum over the initial state and every visited step. ``best_step`` is
    that prefix's pulse count (0 = apply nothing).
    """

    actions: list
    fidelities: list
    final_fidelity: float
    total_reward: float
    discounted_return: float
    best_fidelity: float
    best_step: int


def encode(rho_cur: np.ndarray, rho_tar: np.ndarray, povm: PovmSet) -> np.ndarray:
    """Concatenated probability vectors [P_cur, P_tar]; length 2 * 4**n_qubits."""
    return np.concatenate([measure(rho_cur, povm), measure(rho_tar, povm)])


def env_step(
    rho_cur: np.ndarray,
    rho_tar: np.ndarray,
    action: int,
    table: ActionTable,
    step_index: int,
    max_steps: int,
    f_threshold: float,
    noise: NoiseSample,
    povm: PovmSet,
    rho_encode_tar: np.ndarray | None = None,
    p_encode_tar: np.ndarray | None = None,
    propagator: np.ndarray | None = None,
    sqrt_tar: np.ndarray | None = None,
):
    """Apply one pulse and report the outcome.

    Returns (rho_next, StepOutcome). ``rho_encode_tar`` lets the encoded
    target differ from the reward target (fixed-target mode). The remaining
    keyword arguments are optional hot-loop caches, each bit-identical to
    fresh computation: the target's outcome probabilities, the action's
    propagator, and the target's matrix square root. Termination checks
    threshold before timeout.
    """
    if step_index >= max_steps:
        raise ValueError("step_index must be below max_steps")
    if propagator is None:
        h = table.hamiltonian(action, noise)
        rho_next = evolve(rho_cur, h, table.dt)
    else:
        rho_next = evolve(rho_cur, None, table.dt, propagator=propagator)
    f = fidelity(rho_tar, rho_next, sqrt_tar=sqrt_tar)
    reward = f
    done_threshold = f > f_threshold
    done_timeout = (step_index + 1 >= max_steps) and not done_threshold
    if p_encode_tar is None:
        enc_tar = rho_tar if rho_encode_tar is None else rho_encode_tar
        p_encode_tar = measure(enc_tar, povm)
    encoding_next = np.concatenate([measure(rho_next, povm), p_encode_tar])
    return rho_next, StepOutcome(encoding_next, reward, f, done_threshold, done_timeout)


def run_episode(
    net: MlpNetwork,
    task,
    table: ActionTable,
    max_steps: int,
    f_threshold: float,
    greedy: bool,
    noise_amplitudes: tuple,
    rng: np.random.Generator | None,
    povm: PovmSet,
    gamma: float = 0.9,
    encode_target: np.ndarray | None = None,
) -> EpisodeRecord:
    """Roll out one task and record the trajectory.

    greedy=True plays pure argmax (no rng draws); greedy=False plays uniform
    random actions. Noise, when the amplitudes are nonzero, is resampled per
    pulse and applied to the evolution the agent observes.
    """
    delta_charge, delta_nuclear = noise_amplitudes
    noisy = delta_charge > 0 or delta_nuclear > 0
    if rng is None and (noisy or not greedy):
        raise ValueError("non-greedy or noisy rollouts need an rng")
    enc_tar = task.rho_tar if encode_target is None else encode_target
    sqrt_tar = sqrtm_psd(task.rho_tar)
    propagators = None
    if not noisy:
        propagators = hermitian_exp(table.hamiltonians(), table.dt)

    p_tar = measure(enc_tar, povm)
    rho = task.rho_ini
    p_cur = measure(rho, povm)
    eps_greedy = EpsilonSchedule(1.0, 0.0, 1.0)
    eps_random = EpsilonSchedule(0.0, 0.0, 1.0)

    actions, fidelities = [], []
    total_reward = 0.0
    discounted = 0.0
    final_f = fidelity(task.rho_tar, rho, sqrt_tar=sqrt_tar)
    best_f, best_step = final_f, 0
    for k in range(max_steps):
        s = np.concatenate([p_cur, p_tar])
        if greedy:
            a = select_action(net, s, eps_greedy, rng or np.random.default_rng(0))
        else:
            a = select_action(net, s, eps_random, rng)
        noise = sample_noise(delta_charge, delta_nuclear, table.qubits, rng) if noisy else zero_noise(table.qubits)
        rho, out = env_step(
            rho, task.rho_tar, a, table, k, max_steps, f_threshold, noise, povm,
            rho_encode_tar=enc_tar,
            p_encode_tar=p_tar,
            propagator=None if noisy else propagators[a],
            sqrt_tar=sqrt_tar,
        )
        actions.append(a)
        fidelities.append(out.fidelity)
        total_reward += out.reward
        discounted += (gamma ** k) * out.reward
        final_f = out.fidelity
        if out.fidelity > best_f:
            best_f, best_step = out.fidelity, k + 1
        p_cur = out.encoding_next[: povm.n_outcomes]
        if out.done_threshold or out.done_timeout:
            break
    return EpisodeRecord(
        actions=actions,
        fidelities=fidelities,
        final_fidelity=final_f,
        total_reward=total_reward,
        discounted_return=discounted,
        best_fidelity=best_f,
        best_step=best_step,
    )


@dataclass
class BatchRollout:
    """Stacked greedy-rollout results over n tasks."""

    final_fidelity: np.ndarray  # (n,)
    total_reward: np.ndarray  # (n,)
    discounted_return: np.ndarray  # (n,)
    steps: np.ndarray  # (n,) executed pulse count
    actions: np.ndarray  # (n, max_steps), -1 past episode end
    fidelities: np.ndarray  # (n, max_steps), NaN past episode end
    best_fidelity: np.ndarray  # (n,) designed-sequence fidelity
    best_step: np.ndarray  # (n,) designed-sequence length

    def records(self) -> list:
        out = []
        for i in range(len(self.final_fidelity)):
            k = int(self.steps[i])
            out.append(
                EpisodeRecord(
                    actions=[int(a) for a in self.actions[i, :k]],
                    fidelities=[float(f) for f in self.fidelities[i, :k]],
                    final_fidelity=float(self.final_fidelity[i]),
                    total_reward=float(self.total_reward[i]),
                    discounted_return=float(self.discounted_return[i]),
                    best_fidelity=float(self.best_fidelity[i]),
                    best_step=int(self.best_step[i]),
                )
            )
        return out


def _evolve_batch(rhos: np.ndarray, u: np.ndarray) -> np.ndarray:
    r = np.einsum("nij,njk,nlk->nil", u, rhos, u.conj())
    return 0.5 * (r + np.conj(np.swapaxes(r, -1, -2)))


def _fidelity_batch(sqrt_tar: np.ndarray, rhos: np.ndarray) -> np.ndarray:
    inner = np.einsum("nij,njk,nkl->nil", sqrt_tar, rhos, sqrt_tar)
    w = np.linalg.eigvalsh(inner)
    w = np.where(w < 1e-14, 0.0, w)
    return np.clip(np.sqrt(w).sum(axis=-1), 0.0, 1.0)


def rollout_batch(
    net: MlpNetwork,
    rho_ini: np.ndarray,
    rho_tar: np.ndarray,
    table: ActionTable,
    max_steps: int,
    f_threshold: float,
    povm: PovmSet,
    gamma: float = 0.9,
    noise_amplitudes: tuple = (0.0, 0.0),
    rng: np.random.Generator | None = None,
    rho_encode_tar: np.ndarray | None = None,
) -> BatchRollout:
    """Greedy rollouts of stacked tasks (n, d, d), all advanced in lockstep."""
    n = rho_ini.shape[0]
    qubits = table.qubits
    delta_charge, delta_nuclear = noise_amplitudes
    noisy = delta_charge > 0 or delta_nuclear > 0
    if noisy and rng is None:
        raise ValueError("noisy rollouts need an rng")

    enc_tar = rho_tar if rho_encode_tar is None else rho_encode_tar
    p_tar = measure_batch(enc_tar, povm)
    w, v = np.linalg.eigh(rho_tar)
    w = np.where(w < 1e-14, 0.0, w)
    sqrt_tar = np.einsum("nij,nj,nkj->nik", v, np.sqrt(w), v.conj())

    base_h = table.hamiltonians()
    u_table = hermitian_exp(base_h, table.dt)

    rho = rho_ini.astype(complex).copy()
    active = np.ones(n, dtype=bool)
    final_f = _fidelity_batch(sqrt_tar, rho)
    best_f = final_f.copy()
    best_step = np.zeros(n, dtype=int)
    total_reward = np.zeros(n)
    discounted = np.zeros(n)
    steps = np.zeros(n, dtype=int)
    actions = np.full((n, max_steps), -1, dtype=int)
    fidelities = np.full((n, max_steps), np.nan)

    for k in range(max_steps):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        p_cur = measure_batch(rho[idx], povm)
        q = forward(net, np.concatenate([p_cur, p_tar[idx]], axis=1))
        a = np.argmax(q, axis=1)
        if noisy:
            dz = rng.uniform(-delta_charge, delta_charge, size=(idx.size, qubits))
            dx = rng.uniform(-delta_nuclear, delta_nuclear, size=(idx.size, qubits))
            h = _noisy_hamiltonians(table, a, dz, dx, base_h)
            u = hermitian_exp(h, table.dt)
        else:
            u = u_table[a]
        rho_next = _evolve_batch(rho[idx], u)
        f = _fidelity_batch(sqrt_tar[idx], rho_next)
        rho[idx] = rho_next
        total_reward[idx] += f
        discounted[idx] += (gamma ** k) * f
        final_f[idx] = f
        improved = f > best_f[idx]
        best_f[idx[improved]] = f[improved]
        best_step[idx[improved]] = k + 1
        steps[idx] = k + 1
        actions[idx, k] = a
        fidelities[idx, k] = f
        active[idx] = ~(f > f_threshold)
    return BatchRollout(
        final_fidelity=final_f,
        total_reward=total_reward,
        discounted_return=discounted,
        steps=steps,
        actions=actions,
        fidelities=fidelities,
        best_fidelity=best_f,
        best_step=best_step,
    )


def _noisy_hamiltonians(table, a, dz, dx, base_h) -> np.ndarray:
    """Stacked per-task Hamiltonians with per-qubit sz/sx shifts added."""
    from .linalg import IDENTITY_2, SIGMA_X, SIGMA_Z, tensor

    h = base_h[a].copy()
    if table.qubits == 1:
        h += dz[:, 0, None, None] * SIGMA_Z + dx[:, 0, None, None] * SIGMA_X
    else:
        z1 = tensor(SIGMA_Z, IDENTITY_2)
        z2 = tensor(IDENTITY_2, SIGMA_Z)
        x1 = tensor(SIGMA_X, IDENTITY_2)
        x2 = tensor(IDENTITY_2, SIGMA_X)
        h += 0.5 * (
            dz[:, 0, None, None] * z1
            + dz[:, 1, None, None] * z2
            + dx[:, 0, None, None] * x1
            + dx[:, 1, None, None] * x2
        )
    return h
