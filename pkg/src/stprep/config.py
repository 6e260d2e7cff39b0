"""Run configuration: the full hyperparameter record of a training run.

Configs live in JSON files whose keys match the RunConfig field names
exactly; unknown keys are rejected so typos cannot silently fall back to
defaults. Two presets carry the reference hyperparameters for the
single-qubit and two-qubit experiments.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .hamiltonians import ActionTable, action_table_single, action_table_two

__all__ = ["RunConfig", "load_config", "default_single_qubit", "default_two_qubit"]

_HIDDEN_BY_QUBITS = {1: [64, 64], 2: [128, 128, 64]}


@dataclass
class RunConfig:
    qubits: int
    action_set: str = "full"  # "full" | "restricted" (two-qubit {1..5}^2 variant)
    train_size: int = 100
    validation_size: int = 100
    test_size: int = 0  # 0 = whatever the dataset's test split holds
    batch_size: int = 32
    memory_size: int = 20000
    learning_rate: float = 0.001
    optimizer: str = "adam"  # "adam" | "sgd" (plain mini-batch descent)
    replace_period: int = 200
    gamma: float = 0.9
    hidden_layers: list = field(default_factory=list)
    epsilon_increment: float = 0.001
    epsilon_max: float = 0.95
    eval_epsilon: float = 1.0
    f_threshold: float = 0.999
    episodes: int = 100
    total_time: float = 2.0 * math.pi
    dt: float = math.pi / 5.0
    max_steps: int = 10
    mode: str = "aqsp"  # "aqsp" | "usp"
    usp_target: list | None = None  # [[re, im], ...] amplitudes, usp mode only
    checkpoint_every: int = 50
    clear_memory_on_checkpoint: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.hidden_layers:
            self.hidden_layers = list(_HIDDEN_BY_QUBITS.get(self.qubits, []))
        self.validate()

    def validate(self) -> None:
        if self.qubits not in (1, 2):
            raise ConfigError("qubits must be 1 or 2")
        if self.action_set not in ("full", "restricted"):
            raise ConfigError("action_set must be 'full' or 'restricted'")
        if self.qubits == 1 and self.action_set != "full":
            raise ConfigError("the restricted action set exists only for two qubits")
        if self.mode not in ("aqsp", "usp"):
            raise ConfigError("mode must be 'aqsp' or 'usp'")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError("optimizer must be 'adam' or 'sgd'")
        positives = {
            "train_size": self.train_size,
            "validation_size": self.validation_size,
            "batch_size": self.batch_size,
            "memory_size": self.memory_size,
            "learning_rate": self.learning_rate,
            "replace_period": self.replace_period,
            "f_threshold": self.f_threshold,
            "total_time": self.total_time,
            "dt": self.dt,
            "max_steps": self.max_steps,
            "checkpoint_every": self.checkpoint_every,
        }
        for name, value in positives.items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.test_size < 0 or self.episodes < 0:
            raise ConfigError("test_size and episodes must be non-negative")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma must lie in [0, 1]")
        if not 0.0 <= self.epsilon_max <= 1.0 or self.epsilon_increment < 0:
            raise ConfigError("epsilon schedule out of range")
        if not 0.0 <= self.eval_epsilon <= 1.0:
            raise ConfigError("eval_epsilon must lie in [0, 1]")
        if self.max_steps != round(self.total_time / self.dt):
            raise ConfigError(
                f"max_steps ({self.max_steps}) must equal round(total_time / dt) "
                f"({round(self.total_time / self.dt)})"
            )
        if self.hidden_layers != _HIDDEN_BY_QUBITS[self.qubits]:
            raise ConfigError(
                f"hidden_layers for {self.qubits} qubit(s) must be {_HIDDEN_BY_QUBITS[self.qubits]}"
            )
        if self.mode == "usp":
            if self.usp_target is None:
                raise ConfigError("usp mode needs a usp_target state")
            self._parse_usp_target()
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def _parse_usp_target(self) -> np.ndarray:
        dim = 2 ** self.qubits
        try:
            amps = np.array([complex(re, im) for re, im in self.usp_target], dtype=complex)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"usp_target must be a list of [re, im] pairs: {exc}") from exc
        if amps.shape != (dim,):
            raise ConfigError(f"usp_target must have {dim} amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-6:
            raise ConfigError("usp_target must be normalized")
        return amps

    def usp_target_state(self) -> np.ndarray:
        if self.usp_target is None:
            raise ConfigError("configuration has no usp_target")
        return self._parse_usp_target()

    def action_table(self) -> ActionTable:
        if self.qubits == 1:
            return action_table_single()
        return action_table_two(restricted=self.action_set == "restricted")

    def state_encoding_size(self) -> int:
        return 2 * 4 ** self.qubits

    def layer_sizes(self) -> list:
        return [self.state_encoding_size(), *self.hidden_layers, len(self.action_table())]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if "qubits" not in doc:
            raise ConfigError("configuration must set 'qubits'")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path) as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return RunConfig.from_dict(doc)


def default_single_qubit(**overrides) -> RunConfig:
    """Reference single-qubit hyperparameters."""
    base = dict(
        qubits=1,
        train_size=100,
        validation_size=100,
        test_size=9306,
        batch_size=32,
        memory_size=20000,
        learning_rate=0.001,
        replace_period=200,
        gamma=0.9,
        epsilon_increment=0.001,
        epsilon_max=0.95,
        f_threshold=0.999,
        episodes=100,
        total_time=2.0 * math.pi,
        dt=math.pi / 5.0,
        max_steps=10,
        seed=0,
    )
    base.update(overrides)
    return RunConfig(**base)


def default_two_qubit(**overrides) -> RunConfig:
    """Reference two-qubit hyperparameters."""
    base = dict(
        qubits=2,
        train_size=100,
        validation_size=100,
        test_size=39600,
        batch_size=32,
        memory_size=30000,
        learning_rate=0.001,
        replace_period=200,
        gamma=0.9,
        epsilon_increment=0.0001,
        epsilon_max=0.95,
        f_threshold=0.99,
        episodes=400,
        total_time=5.0 * math.pi,
        dt=math.pi / 4.0,
        max_steps=20,
        seed=0,
    )
    base.update(overrides)
    return RunConfig(**base)
