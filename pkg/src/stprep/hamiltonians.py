"""Control Hamiltonians of the double-quantum-dot model.

Single qubit:  H = J*sz + h*sx, with the exchange coupling J electrically
tunable and the Zeeman splitting h fixed (h = 1, hbar = 1 throughout).

Two qubits (capacitively coupled, qubit 1 = most significant tensor factor):

    H = 1/2 [ J1 (sz x I) + J2 (I x sz) + (J12/2) ((sz - I) x (sz - I))
              + h1 (sx x I) + h2 (I x sx) ]

Coherent noise enters as per-qubit shifts J -> J + dz (charge noise on the
sz channel) and h -> h + dx (nuclear noise on the sx channel); the derived
coupling J12 is left untouched by noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import IDENTITY_2, SIGMA_X, SIGMA_Z, tensor

__all__ = [
    "SingleQubitControls",
    "TwoQubitControls",
    "NoiseSample",
    "ActionTable",
    "zero_noise",
    "sample_noise",
    "single_qubit_hamiltonian",
    "two_qubit_hamiltonian",
    "action_table_single",
    "action_table_two",
]


@dataclass(frozen=True)
class SingleQubitControls:
    """One rectangular pulse setting for a single qubit."""

    exchange: float
    zeeman: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.exchange) and math.isfinite(self.zeeman)):
            raise ValueError("controls must be finite")
        if self.exchange < 0:
            raise ValueError("exchange coupling must be non-negative")


@dataclass(frozen=True)
class TwoQubitControls:
    """Pulse setting for two coupled qubits.

    When ``coupling`` is omitted it defaults to exchange1 * exchange2 / 2.
    """

    exchange1: float
    exchange2: float
    coupling: float | None = None
    zeeman1: float = 1.0
    zeeman2: float = 1.0

    def __post_init__(self):
        if self.exchange1 < 0 or self.exchange2 < 0:
            raise ValueError("exchange couplings must be non-negative")
        if self.coupling is None:
            object.__setattr__(self, "coupling", self.exchange1 * self.exchange2 / 2.0)
        for v in (self.exchange1, self.exchange2, self.coupling, self.zeeman1, self.zeeman2):
            if not math.isfinite(v):
                raise ValueError("controls must be finite")


@dataclass(frozen=True)
class NoiseSample:
    """Per-qubit coherent perturbations, one entry per qubit.

    delta_z shifts the sz coefficient (charge noise), delta_x the sx
    coefficient (nuclear noise).
    """

    delta_z: tuple
    delta_x: tuple

    def __post_init__(self):
        object.__setattr__(self, "delta_z", tuple(float(v) for v in self.delta_z))
        object.__setattr__(self, "delta_x", tuple(float(v) for v in self.delta_x))
        if len(self.delta_z) != len(self.delta_x):
            raise ValueError("delta_z and delta_x must have one entry per qubit")
        if not all(math.isfinite(v) for v in self.delta_z + self.delta_x):
            raise ValueError("noise entries must be finite")

    @property
    def qubits(self) -> int:
        return len(self.delta_z)


def zero_noise(qubits: int) -> NoiseSample:
    return NoiseSample((0.0,) * qubits, (0.0,) * qubits)


def sample_noise(delta_charge: float, delta_nuclear: float, qubits: int, rng: np.random.Generator) -> NoiseSample:
    """Draw one uniform perturbation per qubit and channel.

    Each dz ~ U[-delta_charge, +delta_charge] and dx ~ U[-delta_nuclear,
    +delta_nuclear], independently; callers resample once per pulse.
    """
    if delta_charge < 0 or delta_nuclear < 0:
        raise ValueError("noise amplitudes must be non-negative")
    dz = rng.uniform(-delta_charge, delta_charge, size=qubits)
    dx = rng.uniform(-delta_nuclear, delta_nuclear, size=qubits)
    return NoiseSample(tuple(dz), tuple(dx))


def single_qubit_hamiltonian(c: SingleQubitControls, noise: NoiseSample | None = None) -> np.ndarray:
    """2x2 Hermitian (J + dz) sz + (h + dx) sx."""
    if noise is None:
        noise = zero_noise(1)
    if noise.qubits != 1:
        raise ValueError("single-qubit Hamiltonian needs a 1-qubit noise sample")
    j = c.exchange + noise.delta_z[0]
    h = c.zeeman + noise.delta_x[0]
    return j * SIGMA_Z + h * SIGMA_X


def two_qubit_hamiltonian(c: TwoQubitControls, noise: NoiseSample | None = None) -> np.ndarray:
    """4x4 Hermitian matrix of two coupled qubits, qubit 1 most significant."""
    if noise is None:
        noise = zero_noise(2)
    if noise.qubits != 2:
        raise ValueError("two-qubit Hamiltonian needs a 2-qubit noise sample")
    j1 = c.exchange1 + noise.delta_z[0]
    j2 = c.exchange2 + noise.delta_z[1]
    h1 = c.zeeman1 + noise.delta_x[0]
    h2 = c.zeeman2 + noise.delta_x[1]
    zm = SIGMA_Z - IDENTITY_2
    return 0.5 * (
        j1 * tensor(SIGMA_Z, IDENTITY_2)
        + j2 * tensor(IDENTITY_2, SIGMA_Z)
        + (c.coupling / 2.0) * tensor(zm, zm)
        + h1 * tensor(SIGMA_X, IDENTITY_2)
        + h2 * tensor(IDENTITY_2, SIGMA_X)
    )


@dataclass(frozen=True)
class ActionTable:
    """Ordered discrete action set; index -> pulse controls, fixed for a run."""

    actions: tuple
    dt: float

    def __post_init__(self):
        if len(self.actions) == 0:
            raise ValueError("action table must be nonempty")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError("pulse duration must be positive")
        object.__setattr__(self, "actions", tuple(self.actions))

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def qubits(self) -> int:
        return 1 if isinstance(self.actions[0], SingleQubitControls) else 2

    @property
    def dim(self) -> int:
        return 2 ** self.qubits

    def hamiltonian(self, index: int, noise: NoiseSample | None = None) -> np.ndarray:
        c = self.actions[index]
        if isinstance(c, SingleQubitControls):
            return single_qubit_hamiltonian(c, noise)
        return two_qubit_hamiltonian(c, noise)

    def hamiltonians(self, noise: NoiseSample | None = None) -> np.ndarray:
        """Stacked (n_actions, d, d) Hamiltonians, one noise sample shared."""
        return np.stack([self.hamiltonian(i, noise) for i in range(len(self))])


def action_table_single() -> ActionTable:
    """Five exchange pulses J in {0..4}, duration pi/5."""
    return ActionTable(
        actions=tuple(SingleQubitControls(exchange=float(j)) for j in range(5)),
        dt=math.pi / 5,
    )


def action_table_two(restricted: bool = False) -> ActionTable:
    """Two-qubit pulse grid, duration pi/4.

    Default: (J1, J2) over {0..5}^2 (36 actions, row-major index 6*i + j).
    ``restricted`` switches to the strictly positive {1..5}^2 variant
    (25 actions, row-major index 5*(i-1) + (j-1)).
    """
    values = range(1, 6) if restricted else range(6)
    actions = tuple(
        TwoQubitControls(exchange1=float(i), exchange2=float(j))
        for i in values
        for j in values
    )
    return ActionTable(actions=actions, dt=math.pi / 4)
