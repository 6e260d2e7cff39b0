"""State pools and initial/target task pairs for the preparation experiments.

Single-qubit pool: a 7 x 14 grid on the Bloch sphere (98 states, poles
excluded), |psi> = cos(a/2)|0> + e^{ib} sin(a/2)|1>.

Two-qubit pool: all 6912 amplitude vectors [b1*c1, b2*c2, b3*c3, b4*c4]
with per-component phases b_j in {1, i, -1, -i} and hyperspherical
coordinates

    c1 = cos(t1), c2 = sin(t1)cos(t2),
    c3 = sin(t1)sin(t2)cos(t3), c4 = sin(t1)sin(t2)sin(t3),

each t_i in {pi/8, pi/4, 3pi/8}; enumeration is theta-major then
phase-major, so the pool is identical across runs.

Tasks are all ordered pairs (i, j), i != j, shuffled once and split into
train/validation/test index lists. The dataset file is JSON with complex
numbers stored as [re, im] pairs; round trips are bit-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .linalg import pure_to_density

__all__ = [
    "TaskPair",
    "StateDataset",
    "gen_bloch_states",
    "gen_hypersphere_states",
    "build_pairs",
    "build_dataset",
    "save_dataset",
    "load_dataset",
]

DATASET_FORMAT = "qsp-dataset-v1"
SPLITS = ("train", "validation", "test")


@dataclass(frozen=True)
class TaskPair:
    """One preparation task: drive rho_ini toward rho_tar."""

    rho_ini: np.ndarray
    rho_tar: np.ndarray

    def __post_init__(self):
        if self.rho_ini.shape != self.rho_tar.shape:
            raise ValueError("initial and target states must share a dimension")


def gen_bloch_states(n_alpha: int = 7, n_beta: int = 14) -> np.ndarray:
    """(n_alpha * n_beta, 2) pure states on a polar-azimuthal grid, poles excluded."""
    if n_alpha < 1 or n_beta < 1:
        raise ValueError("grid counts must be positive")
    alphas = np.array([k * math.pi / (n_alpha + 1) for k in range(1, n_alpha + 1)])
    betas = np.array([2.0 * math.pi * m / n_beta for m in range(n_beta)])
    states = np.empty((n_alpha * n_beta, 2), dtype=complex)
    i = 0
    for a in alphas:
        for b in betas:
            states[i, 0] = math.cos(a / 2.0)
            states[i, 1] = np.exp(1j * b) * math.sin(a / 2.0)
            i += 1
    return states


def gen_hypersphere_states() -> np.ndarray:
    """All 6912 phase-decorated points of the 4-dimensional unit hypersphere grid."""
    thetas = (math.pi / 8.0, math.pi / 4.0, 3.0 * math.pi / 8.0)
    phases = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
    out = []
    for t1 in thetas:
        for t2 in thetas:
            for t3 in thetas:
                c = (
                    math.cos(t1),
                    math.sin(t1) * math.cos(t2),
                    math.sin(t1) * math.sin(t2) * math.cos(t3),
                    math.sin(t1) * math.sin(t2) * math.sin(t3),
                )
                for b1 in phases:
                    for b2 in phases:
                        for b3 in phases:
                            for b4 in phases:
                                out.append((b1 * c[0], b2 * c[1], b3 * c[2], b4 * c[3]))
    return np.array(out, dtype=complex)


def _enumerate_pairs(n_states: int) -> np.ndarray:
    """All ordered (i, j), i != j, in row-major order; shape (n*(n-1), 2)."""
    i, j = np.meshgrid(np.arange(n_states), np.arange(n_states), indexing="ij")
    mask = i != j
    return np.stack([i[mask], j[mask]], axis=1)


def _split_pairs(n_pairs: int, rng: np.random.Generator, train_n: int, val_n: int) -> dict:
    if train_n < 0 or val_n < 0 or train_n + val_n > n_pairs:
        raise ValueError(f"cannot split {n_pairs} pairs into train={train_n} + validation={val_n}")
    order = rng.permutation(n_pairs)
    return {
        "train": order[:train_n],
        "validation": order[train_n:train_n + val_n],
        "test": order[train_n + val_n:],
    }


def build_pairs(states: np.ndarray, rng: np.random.Generator, train_n: int, val_n: int):
    """Pair every state with every other, shuffle, and split.

    Returns (train, validation, test) lists of TaskPair.
    """
    states = np.asarray(states, dtype=complex)
    if len(states) < 2:
        raise ValueError("need at least two states to form pairs")
    pairs = _enumerate_pairs(len(states))
    splits = _split_pairs(len(pairs), rng, train_n, val_n)
    dens = np.stack([pure_to_density(s) for s in states])
    out = []
    for name in SPLITS:
        idx = splits[name]
        out.append([TaskPair(dens[pairs[k, 0]], dens[pairs[k, 1]]) for k in idx])
    return tuple(out)


@dataclass
class StateDataset:
    """A state pool plus its shuffled ordered-pair task splits."""

    qubits: int
    seed: int
    states: np.ndarray  # (n_states, 2**qubits) complex pure states
    pairs: np.ndarray  # (n_pairs, 2) int indices into states
    splits: dict  # split name -> int array of indices into pairs

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=complex)
        self.pairs = np.asarray(self.pairs, dtype=int)
        self.splits = {k: np.asarray(v, dtype=int) for k, v in self.splits.items()}

    @property
    def dim(self) -> int:
        return 2 ** self.qubits

    def split_size(self, split: str) -> int:
        return len(self.splits[split])

    def densities(self) -> np.ndarray:
        return np.stack([pure_to_density(s) for s in self.states])

    def task_indices(self, split: str) -> np.ndarray:
        """(n, 2) state-index pairs of a split, in split order."""
        if split not in self.splits:
            raise KeyError(f"unknown split {split!r}")
        return self.pairs[self.splits[split]]

    def tasks(self, split: str) -> list:
        dens = self.densities()
        return [TaskPair(dens[i], dens[j]) for i, j in self.task_indices(split)]


def build_dataset(
    qubits: int,
    seed: int,
    train_n: int = 100,
    val_n: int = 100,
    two_qubit_pool: int = 200,
) -> StateDataset:
    """Generate the state pool and pair splits for one or two qubits.

    The two-qubit flow first draws ``two_qubit_pool`` states uniformly
    without replacement from the 6912-point grid, then pairs those.
    """
    rng = np.random.default_rng(seed)
    if qubits == 1:
        states = gen_bloch_states()
    elif qubits == 2:
        full = gen_hypersphere_states()
        chosen = rng.choice(len(full), size=two_qubit_pool, replace=False)
        states = full[chosen]
    else:
        raise ValueError("qubits must be 1 or 2")
    pairs = _enumerate_pairs(len(states))
    splits = _split_pairs(len(pairs), rng, train_n, val_n)
    return StateDataset(qubits=qubits, seed=seed, states=states, pairs=pairs, splits=splits)


def _complex_to_json(v: complex) -> list:
    return [v.real, v.imag]


def save_dataset(ds: StateDataset, path) -> None:
    doc = {
        "format": DATASET_FORMAT,
        "qubits": ds.qubits,
        "seed": ds.seed,
        "states": [[_complex_to_json(c) for c in s] for s in ds.states],
        "pairs": ds.pairs.tolist(),
        "splits": {k: v.tolist() for k, v in ds.splits.items()},
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_dataset(path) -> StateDataset:
    try:
        with open(path) as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read dataset {path}: {exc}") from exc
    if doc.get("format") != DATASET_FORMAT:
        raise DataFormatError(f"unsupported dataset format {doc.get('format')!r}")
    try:
        states = np.array(
            [[complex(re, im) for re, im in s] for s in doc["states"]], dtype=complex
        )
        ds = StateDataset(
            qubits=int(doc["qubits"]),
            seed=int(doc["seed"]),
            states=states,
            pairs=np.asarray(doc["pairs"], dtype=int),
            splits={k: np.asarray(v, dtype=int) for k, v in doc["splits"].items()},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed dataset {path}: {exc}") from exc
    for name in SPLITS:
        if name not in ds.splits:
            raise DataFormatError(f"dataset {path} misses split {name!r}")
    if ds.pairs.ndim != 2 or ds.pairs.shape[1] != 2:
        raise DataFormatError(f"dataset {path} has a malformed pair table")
    return ds
