"""Deep Q-learning machinery: replay memory, exploration schedule, updates.

Exploration convention: epsilon is the GREEDY probability. Actions are
greedy (argmax) with probability epsilon and uniform random otherwise;
epsilon anneals upward from 0 by a fixed increment per environment step,
saturating at its maximum. Evaluation runs at epsilon = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .network import (
    MlpNetwork,
    SgdConfig,
    apply_gradients,
    copy_parameters,
    forward,
    loss_and_gradients,
)

__all__ = [
    "ExperienceUnit",
    "ReplayMemory",
    "EpsilonSchedule",
    "AgentConfig",
    "select_action",
    "advance_epsilon",
    "compute_targets",
    "train_step",
]


class ExperienceUnit(NamedTuple):
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    done: bool  # True only for fidelity-threshold termination, never for timeouts


class ReplayMemory:
    """Capacity-bounded FIFO store of experience units.

    Backed by preallocated ring-buffer arrays so batch sampling is a single
    fancy-index operation on the training hot path.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self._s = None
        self._a = np.empty(self.capacity, dtype=np.int64)
        self._r = np.empty(self.capacity, dtype=float)
        self._s_next = None
        self._done = np.empty(self.capacity, dtype=bool)
        self._size = 0
        self._head = 0  # next write position

    def __len__(self) -> int:
        return self._size

    def clear(self) -> None:
        self._size = 0
        self._head = 0

    def store(self, unit: ExperienceUnit) -> None:
        s = np.asarray(unit.s, dtype=float)
        s_next = np.asarray(unit.s_next, dtype=float)
        if s.shape != s_next.shape:
            raise ValueError("s and s_next must have the same length")
        if self._s is None:
            self._s = np.empty((self.capacity, s.size), dtype=float)
            self._s_next = np.empty((self.capacity, s.size), dtype=float)
        i = self._head
        self._s[i] = s
        self._a[i] = int(unit.a)
        self._r[i] = float(unit.r)
        self._s_next[i] = s_next
        self._done[i] = bool(unit.done)
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _logical_index(self, idx: np.ndarray) -> np.ndarray:
        # logical position 0 = oldest retained unit
        if self._size < self.capacity:
            return idx
        return (self._head + idx) % self.capacity

    def unit(self, i: int) -> ExperienceUnit:
        if not 0 <= i < self._size:
            raise IndexError(i)
        j = int(self._logical_index(np.asarray(i)))
        return ExperienceUnit(
            s=self._s[j].copy(),
            a=int(self._a[j]),
            r=float(self._r[j]),
            s_next=self._s_next[j].copy(),
            done=bool(self._done[j]),
        )

    def units(self) -> list:
        return [self.unit(i) for i in range(self._size)]

    def sample_arrays(self, n: int, rng: np.random.Generator):
        """Uniform sample without replacement, returned as stacked arrays."""
        if n > self._size:
            raise ValueError(f"cannot sample {n} units from a memory of size {self._size}")
        idx = self._logical_index(rng.choice(self._size, size=n, replace=False))
        return self._s[idx], self._a[idx], self._r[idx], self._s_next[idx], self._done[idx]

    def sample(self, n: int, rng: np.random.Generator) -> list:
        s, a, r, s_next, done = self.sample_arrays(n, rng)
        return [
            ExperienceUnit(s[i].copy(), int(a[i]), float(r[i]), s_next[i].copy(), bool(done[i]))
            for i in range(n)
        ]


@dataclass
class EpsilonSchedule:
    current: float
    increment: float
    maximum: float

    def __post_init__(self):
        if not 0.0 <= self.current <= self.maximum <= 1.0:
            raise ValueError("need 0 <= current <= maximum <= 1")
        if self.increment < 0:
            raise ValueError("increment must be non-negative")


def advance_epsilon(eps: EpsilonSchedule) -> EpsilonSchedule:
    """One per-step annealing update: current <- min(current + increment, maximum)."""
    eps.current = min(eps.current + eps.increment, eps.maximum)
    return eps


def select_action(net: MlpNetwork, s, eps: EpsilonSchedule, rng: np.random.Generator) -> int:
    """Greedy with probability eps.current, uniform random otherwise.

    Argmax ties break toward the lowest index. At epsilon = 1 no random draw
    is consumed, so greedy evaluation is rng-free.
    """
    n_actions = net.output_size
    if eps.current < 1.0 and rng.random() >= eps.current:
        return int(rng.integers(n_actions))
    return int(np.argmax(forward(net, s)))


@dataclass(frozen=True)
class AgentConfig:
    gamma: float
    replace_period: int
    sgd: SgdConfig

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.replace_period < 1:
            raise ValueError("replace period must be positive")


def compute_targets(batch: list, target_net: MlpNetwork, gamma: float) -> np.ndarray:
    """TD targets y_i = r_i + gamma * max_a' Q(s'_i, a'); y_i = r_i when done."""
    if len(batch) == 0:
        raise ValueError("batch must be nonempty")
    s_next = np.stack([np.asarray(u.s_next, dtype=float) for u in batch])
    r = np.array([u.r for u in batch], dtype=float)
    done = np.array([u.done for u in batch], dtype=bool)
    return _targets_from_arrays(r, s_next, done, target_net, gamma)


def _targets_from_arrays(r, s_next, done, target_net, gamma) -> np.ndarray:
    best_next = forward(target_net, s_next).max(axis=1)
    return r + gamma * best_next * ~done


def train_step(
    main: MlpNetwork,
    target: MlpNetwork,
    memory: ReplayMemory,
    cfg: AgentConfig,
    step_counter: int,
    rng: np.random.Generator,
    optimizer=None,
):
    """One environment-step worth of learning.

    Performs a single mini-batch update on ``main`` when the memory holds at
    least a full batch (returns the batch loss, else None), then syncs
    ``target`` from ``main`` every ``replace_period`` steps. ``optimizer``
    may supply a stateful update rule (e.g. AdamOptimizer); the default is
    the plain descent step theta <- theta - alpha * grad.
    """
    loss = None
    if len(memory) >= cfg.sgd.batch_size:
        s, a, r, s_next, done = memory.sample_arrays(cfg.sgd.batch_size, rng)
        y = _targets_from_arrays(r, s_next, done, target, cfg.gamma)
        loss, grads = loss_and_gradients(main, s, a, y)
        if optimizer is None:
            apply_gradients(main, grads, cfg.sgd)
        else:
            optimizer.step(main, grads)
    if step_counter % cfg.replace_period == 0:
        copy_parameters(main, target)
    return loss
