"""End-to-end orchestration: training loop, evaluation, sweeps, persistence.

One training "episode" is a full sweep over the training tasks in dataset
order; each environment step performs action selection, one pulse, replay
storage, one mini-batch update, and the epsilon increment. After every
episode the validation set is played greedily and one metrics row is
appended. Every ``checkpoint_every`` episodes the networks are persisted
and (by default) the replay memory is released, so resumed runs start with
an empty memory.

TD targets bootstrap unconditionally (stored transitions carry done=False
even at threshold termination). Treating threshold termination as absorbing
inverts the incentive structure — a terminal target y = r caps at ~1 while
continuing to collect per-step fidelity is worth ~r/(1-gamma) — and
measurably caps the achievable preparation fidelity.

Reported fidelity per task is the designed-sequence (best-prefix) fidelity;
see the env module docstring.

Determinism: with ``record_timing`` off (the default), the metrics file is
a pure function of (config, seed) and byte-identical across reruns; the
wall_seconds column then holds 0.0. Timing is honest telemetry only when
explicitly requested, because both cannot hold at once.
"""

from __future__ import annotations

import copy
import json
import time
from dataclasses import dataclass

import numpy as np

from .agent import AgentConfig, EpsilonSchedule, ExperienceUnit, ReplayMemory, advance_epsilon, select_action, train_step
from .config import RunConfig
from .dataset import StateDataset, TaskPair
from .env import EpisodeRecord, env_step, rollout_batch, run_episode
from .errors import ConfigError, DataFormatError, NumericalError
from .hamiltonians import zero_noise
from .linalg import hermitian_exp, pure_to_density, sqrtm_psd
from .network import (
    AdamOptimizer,
    MlpNetwork,
    SgdConfig,
    copy_parameters,
    init_network,
    network_from_dict,
    network_to_dict,
)
from .povm import PovmSet, measure, pauli4_single, tensor_povm

__all__ = [
    "MetricsRow",
    "Checkpoint",
    "METRICS_HEADER",
    "NOISE_HEADER",
    "EVAL_HEADER",
    "train",
    "evaluate",
    "noise_sweep",
    "table2_suite",
    "export_trajectory",
    "save_checkpoint",
    "load_checkpoint",
    "write_metrics",
    "povm_for",
    "tasks_to_stacks",
]

CHECKPOINT_FORMAT = "qsp-checkpoint-v1"
TRAJECTORY_FORMAT = "qsp-trajectory-v1"

METRICS_HEADER = "episode,avg_validation_fidelity,avg_validation_total_reward,mean_training_loss,epsilon,wall_seconds"
NOISE_HEADER = "delta,kind,avg_fidelity,std_fidelity,repeats"
EVAL_HEADER = "pair_index,fidelity"


@dataclass
class MetricsRow:
    episode: int
    avg_validation_fidelity: float
    avg_validation_total_reward: float
    mean_training_loss: float | None
    epsilon: float
    wall_seconds: float

    def as_csv(self) -> str:
        loss = "" if self.mean_training_loss is None else repr(self.mean_training_loss)
        return (
            f"{self.episode},{self.avg_validation_fidelity!r},"
            f"{self.avg_validation_total_reward!r},{loss},"
            f"{self.epsilon!r},{self.wall_seconds!r}"
        )


@dataclass
class Checkpoint:
    config: RunConfig
    main_net: MlpNetwork
    target_net: MlpNetwork
    global_step: int
    epsilon: float
    episode: int  # completed training episodes
    rng_state: dict
    optimizer_state: dict | None = None
    data_path: str | None = None


def povm_for(qubits: int) -> PovmSet:
    return tensor_povm(pauli4_single(), qubits)


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "config": ckpt.config.to_dict(),
        "main_net": network_to_dict(ckpt.main_net),
        "target_net": network_to_dict(ckpt.target_net),
        "global_step": ckpt.global_step,
        "epsilon": ckpt.epsilon,
        "episode": ckpt.episode,
        "rng_state": ckpt.rng_state,
        "optimizer_state": ckpt.optimizer_state,
        "data_path": ckpt.data_path,
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def load_checkpoint(path) -> Checkpoint:
    try:
        with open(path) as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read checkpoint {path}: {exc}") from exc
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise DataFormatError(f"unsupported checkpoint format {doc.get('format')!r}")
    try:
        return Checkpoint(
            config=RunConfig.from_dict(doc["config"]),
            main_net=network_from_dict(doc["main_net"]),
            target_net=network_from_dict(doc["target_net"]),
            global_step=int(doc["global_step"]),
            epsilon=float(doc["epsilon"]),
            episode=int(doc["episode"]),
            rng_state=doc["rng_state"],
            optimizer_state=doc.get("optimizer_state"),
            data_path=doc.get("data_path"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed checkpoint {path}: {exc}") from exc


def write_metrics(rows: list, path) -> None:
    with open(path, "w") as f:
        f.write(METRICS_HEADER + "\n")
        for row in rows:
            f.write(row.as_csv() + "\n")


def _restore_rng(state: dict) -> np.random.Generator:
    rng = np.random.default_rng(0)
    rng.bit_generator.state = state
    return rng


def _mode_targets(config: RunConfig, rho_tar: np.ndarray):
    """Reward targets plus, for fixed-target mode, the stacked encoding targets."""
    if config.mode != "usp":
        return rho_tar, None
    fixed = pure_to_density(config.usp_target_state())
    rho_reward = np.broadcast_to(fixed, rho_tar.shape).copy()
    return rho_reward, rho_reward


def _check_dataset(config: RunConfig, dataset: StateDataset) -> None:
    if dataset.qubits != config.qubits:
        raise ConfigError(
            f"dataset holds {dataset.qubits}-qubit states but config expects {config.qubits}"
        )
    expected = {"train": config.train_size, "validation": config.validation_size}
    if config.test_size:
        expected["test"] = config.test_size
    for split, size in expected.items():
        actual = dataset.split_size(split)
        if actual != size:
            raise ConfigError(f"dataset {split} split holds {actual} pairs, config expects {size}")


def train(
    config: RunConfig,
    dataset: StateDataset,
    out_dir=None,
    resume: Checkpoint | None = None,
    record_timing: bool = False,
    data_path: str | None = None,
):
    """Run the training loop; returns (final Checkpoint, list of MetricsRow).

    With ``out_dir`` set, metrics.csv is streamed there and checkpoints are
    written as checkpoint_ep{N}.json plus a final checkpoint.json.
    """
    _check_dataset(config, dataset)
    povm = povm_for(config.qubits)
    table = config.action_table()
    layer_sizes = config.layer_sizes()

    if resume is not None:
        if resume.config.to_dict() != config.to_dict():
            raise ConfigError("resume checkpoint was produced by a different configuration")
        rng = _restore_rng(resume.rng_state)
        main = copy.deepcopy(resume.main_net)
        target = copy.deepcopy(resume.target_net)
        eps = EpsilonSchedule(resume.epsilon, config.epsilon_increment, config.epsilon_max)
        global_step = resume.global_step
        episode_start = resume.episode
        optimizer = None
        if config.optimizer == "adam":
            if resume.optimizer_state is not None:
                optimizer = AdamOptimizer.from_dict(resume.optimizer_state)
            else:
                optimizer = AdamOptimizer(config.learning_rate)
    else:
        rng = np.random.default_rng(config.seed)
        main = init_network(layer_sizes, rng)
        target = init_network(layer_sizes, rng)
        copy_parameters(main, target)
        eps = EpsilonSchedule(0.0, config.epsilon_increment, config.epsilon_max)
        global_step = 0
        episode_start = 0
        optimizer = AdamOptimizer(config.learning_rate) if config.optimizer == "adam" else None

    memory = ReplayMemory(config.memory_size)
    agent_cfg = AgentConfig(
        gamma=config.gamma,
        replace_period=config.replace_period,
        sgd=SgdConfig(learning_rate=config.learning_rate, batch_size=config.batch_size),
    )

    dens = dataset.densities()
    train_idx = dataset.task_indices("train")
    rho_ini_train = dens[train_idx[:, 0]]
    rho_tar_train, enc_tar_train = _mode_targets(config, dens[train_idx[:, 1]])
    val_idx = dataset.task_indices("validation")
    rho_ini_val = dens[val_idx[:, 0]]
    rho_tar_val, enc_tar_val = _mode_targets(config, dens[val_idx[:, 1]])

    # Fixed per-task caches: target probabilities, target square roots, and
    # the noiseless propagators (training never sees noise).
    propagators = hermitian_exp(table.hamiltonians(), table.dt)
    enc_for_p = rho_tar_train if enc_tar_train is None else enc_tar_train
    p_tar_train = np.stack([measure(m, povm) for m in enc_for_p])
    sqrt_tar_train = np.stack([sqrtm_psd(m) for m in rho_tar_train])
    no_noise = zero_noise(config.qubits)

    metrics: list = []
    metrics_file = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        metrics_file = open(out_dir / "metrics.csv", "w")
        metrics_file.write(METRICS_HEADER + "\n")

    def make_checkpoint() -> Checkpoint:
        return Checkpoint(
            config=config,
            main_net=copy.deepcopy(main),
            target_net=copy.deepcopy(target),
            global_step=global_step,
            epsilon=eps.current,
            episode=episode,
            rng_state=rng.bit_generator.state,
            optimizer_state=None if optimizer is None else optimizer.to_dict(),
            data_path=data_path,
        )

    episode = episode_start
    try:
        for episode_i in range(episode_start, config.episodes):
            started = time.perf_counter() if record_timing else 0.0
            loss_sum, loss_count = 0.0, 0
            for t in range(len(rho_ini_train)):
                rho = rho_ini_train[t]
                rho_tar = rho_tar_train[t]
                enc_tar = None if enc_tar_train is None else enc_tar_train[t]
                p_tar = p_tar_train[t]
                sqrt_tar = sqrt_tar_train[t]
                s = np.concatenate([measure(rho, povm), p_tar])
                for k in range(config.max_steps):
                    a = select_action(main, s, eps, rng)
                    rho, out = env_step(
                        rho, rho_tar, a, table, k, config.max_steps,
                        config.f_threshold, no_noise, povm,
                        rho_encode_tar=enc_tar,
                        p_encode_tar=p_tar,
                        propagator=propagators[a],
                        sqrt_tar=sqrt_tar,
                    )
                    # done=False: targets bootstrap through both termination
                    # kinds (see module docstring).
                    memory.store(ExperienceUnit(s, a, out.reward, out.encoding_next, False))
                    global_step += 1
                    loss = train_step(main, target, memory, agent_cfg, global_step, rng, optimizer=optimizer)
                    advance_epsilon(eps)
                    if loss is not None:
                        if not np.isfinite(loss):
                            raise NumericalError(f"training loss diverged at step {global_step}")
                        loss_sum += loss
                        loss_count += 1
                    s = out.encoding_next
                    if out.done_threshold or out.done_timeout:
                        break
            episode = episode_i + 1

            val = rollout_batch(
                main, rho_ini_val, rho_tar_val, table, config.max_steps,
                config.f_threshold, povm, gamma=config.gamma,
                rho_encode_tar=enc_tar_val,
            )
            row = MetricsRow(
                episode=episode,
                avg_validation_fidelity=float(np.mean(val.best_fidelity)),
                avg_validation_total_reward=float(np.mean(val.total_reward)),
                mean_training_loss=(loss_sum / loss_count) if loss_count else None,
                epsilon=eps.current,
                wall_seconds=(time.perf_counter() - started) if record_timing else 0.0,
            )
            metrics.append(row)
            if metrics_file is not None:
                metrics_file.write(row.as_csv() + "\n")
                metrics_file.flush()

            if episode % config.checkpoint_every == 0:
                if out_dir is not None:
                    save_checkpoint(make_checkpoint(), out_dir / f"checkpoint_ep{episode}.json")
                if config.clear_memory_on_checkpoint:
                    memory.clear()
    finally:
        if metrics_file is not None:
            metrics_file.close()

    final = make_checkpoint()
    if out_dir is not None:
        save_checkpoint(final, out_dir / "checkpoint.json")
    return final, metrics


def tasks_to_stacks(tasks: list):
    rho_ini = np.stack([t.rho_ini for t in tasks])
    rho_tar = np.stack([t.rho_tar for t in tasks])
    return rho_ini, rho_tar


def evaluate(
    ckpt: Checkpoint,
    tasks: list,
    noise: tuple = (0.0, 0.0),
    repeats: int = 1,
    rng: np.random.Generator | None = None,
):
    """Greedy rollout of every task; returns (avg_fidelity, per-task fidelities, records).

    Per-task fidelity is the designed-sequence (best-prefix) fidelity. With
    nonzero noise amplitudes, per-task fidelities are averaged over
    ``repeats`` independent noise realizations and the records come from
    the first realization. Noiseless evaluation runs exactly once.
    """
    if len(tasks) == 0:
        raise ValueError("cannot evaluate an empty task list")
    config = ckpt.config
    povm = povm_for(config.qubits)
    table = config.action_table()
    rho_ini, rho_tar = tasks_to_stacks(tasks)
    if rho_ini.shape[1] != 2 ** config.qubits:
        raise ConfigError("task dimension does not match the checkpoint configuration")
    _, enc_tar = _mode_targets(config, rho_tar)

    noisy = noise[0] > 0 or noise[1] > 0
    runs = repeats if noisy else 1
    if noisy and rng is None:
        rng = np.random.default_rng(config.seed)
    per_task = np.zeros(len(tasks))
    records: list = []
    for r in range(runs):
        br = rollout_batch(
            ckpt.main_net, rho_ini, rho_tar, table, config.max_steps,
            config.f_threshold, povm, gamma=config.gamma,
            noise_amplitudes=noise, rng=rng, rho_encode_tar=enc_tar,
        )
        per_task += br.best_fidelity
        if r == 0:
            records = br.records()
    per_task /= runs
    return float(np.mean(per_task)), per_task, records


def noise_sweep(
    ckpt: Checkpoint,
    tasks: list,
    kind: str,
    amplitudes,
    repeats: int,
    rng: np.random.Generator,
) -> list:
    """Average fidelity under per-pulse noise, per amplitude and noise kind.

    Returns rows of dicts matching NOISE_HEADER. ``kind`` selects the charge
    curve, the nuclear curve, or both curves.
    """
    if kind not in ("charge", "nuclear", "both"):
        raise ValueError(f"unknown noise kind {kind!r}")
    if repeats < 1:
        raise ValueError("repeats must be positive")
    kinds = ("charge", "nuclear") if kind == "both" else (kind,)
    rows = []
    for k in kinds:
        for delta in amplitudes:
            if delta < 0:
                raise ValueError("noise amplitudes must be non-negative")
            noise = (float(delta), 0.0) if k == "charge" else (0.0, float(delta))
            if delta == 0:
                avg, _, _ = evaluate(ckpt, tasks)
                rows.append({"delta": 0.0, "kind": k, "avg_fidelity": avg,
                             "std_fidelity": 0.0, "repeats": 1})
                continue
            run_avgs = []
            for _ in range(repeats):
                avg, _, _ = evaluate(ckpt, tasks, noise=noise, repeats=1, rng=rng)
                run_avgs.append(avg)
            rows.append({
                "delta": float(delta),
                "kind": k,
                "avg_fidelity": float(np.mean(run_avgs)),
                "std_fidelity": float(np.std(run_avgs)),
                "repeats": repeats,
            })
    return rows


def write_noise_rows(rows: list, path) -> None:
    with open(path, "w") as f:
        f.write(NOISE_HEADER + "\n")
        for r in rows:
            f.write(f"{r['delta']!r},{r['kind']},{r['avg_fidelity']!r},{r['std_fidelity']!r},{r['repeats']}\n")


def write_eval_rows(pair_indices, fidelities, path) -> None:
    with open(path, "w") as f:
        f.write(EVAL_HEADER + "\n")
        for idx, fid in zip(pair_indices, fidelities):
            f.write(f"{int(idx)},{float(fid)!r}\n")


def _basis_state(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return pure_to_density(v)


def _record_to_trajectory(record: EpisodeRecord, config: RunConfig, pair_index: int | None = None) -> dict:
    table = config.action_table()
    controls = []
    for a in record.actions:
        c = table.actions[a]
        if config.qubits == 1:
            controls.append([c.exchange])
        else:
            controls.append([c.exchange1, c.exchange2])
    return {
        "format": TRAJECTORY_FORMAT,
        "qubits": config.qubits,
        "dt": table.dt,
        "pair_index": pair_index,
        "actions": list(record.actions),
        "controls": controls,
        "fidelities": list(record.fidelities),
        "final_fidelity": record.final_fidelity,
        "best_fidelity": record.best_fidelity,
        "best_step": record.best_step,
        "total_reward": record.total_reward,
        "discounted_return": record.discounted_return,
    }


def export_trajectory(ckpt: Checkpoint, dataset: StateDataset, pair_index: int) -> dict:
    """Greedy noiseless trajectory of one dataset pair, as a JSON-ready dict."""
    config = ckpt.config
    if not 0 <= pair_index < len(dataset.pairs):
        raise DataFormatError(f"pair index {pair_index} outside dataset ({len(dataset.pairs)} pairs)")
    dens = dataset.densities()
    i, j = dataset.pairs[pair_index]
    task = TaskPair(dens[i], dens[j])
    reward_tar, enc_tar = _mode_targets(config, task.rho_tar[None])
    task = TaskPair(task.rho_ini, reward_tar[0])
    povm = povm_for(config.qubits)
    record = run_episode(
        ckpt.main_net, task, config.action_table(), config.max_steps,
        config.f_threshold, greedy=True, noise_amplitudes=(0.0, 0.0),
        rng=None, povm=povm, gamma=config.gamma,
        encode_target=None if enc_tar is None else enc_tar[0],
    )
    return _record_to_trajectory(record, config, pair_index)


def table2_suite(aqsp_ckpt: Checkpoint, usp_ckpt: Checkpoint, dataset: StateDataset) -> dict:
    """Cross-model comparison over the four canonical preparation tasks.

    Evaluates both models (where defined) on: every test initial state to
    the fixed target, |0> -> |1>, |1> -> |0>, and the full test split, and
    exports the two single-pair trajectories per model.
    """
    for ckpt in (aqsp_ckpt, usp_ckpt):
        if ckpt.config.qubits != 1:
            raise ConfigError("the comparison suite is defined for single-qubit checkpoints")
    if aqsp_ckpt.config.mode != "aqsp" or usp_ckpt.config.mode != "usp":
        raise ConfigError("expected one aqsp-mode and one usp-mode checkpoint")

    fixed_tar = pure_to_density(usp_ckpt.config.usp_target_state())
    ket0 = _basis_state(2, 0)
    ket1 = _basis_state(2, 1)

    test_tasks = dataset.tasks("test")
    to_fixed = [TaskPair(t.rho_ini, fixed_tar) for t in test_tasks]
    zero_to_one = [TaskPair(ket0, ket1)]
    one_to_zero = [TaskPair(ket1, ket0)]

    def avg(ckpt, tasks):
        return evaluate(ckpt, tasks)[0]

    table = {
        "any_to_target": {"usp": avg(usp_ckpt, to_fixed), "aqsp": avg(aqsp_ckpt, to_fixed)},
        "zero_to_one": {"usp": avg(usp_ckpt, zero_to_one), "aqsp": avg(aqsp_ckpt, zero_to_one)},
        "one_to_zero": {"usp": avg(usp_ckpt, one_to_zero), "aqsp": avg(aqsp_ckpt, one_to_zero)},
        "any_to_any": {"aqsp": avg(aqsp_ckpt, test_tasks)},
    }

    trajectories: dict = {}
    for name, tasks in (("zero_to_one", zero_to_one), ("one_to_zero", one_to_zero)):
        trajectories[name] = {}
        for model, ckpt in (("usp", usp_ckpt), ("aqsp", aqsp_ckpt)):
            config = ckpt.config
            _, enc = _mode_targets(config, tasks[0].rho_tar[None])
            record = run_episode(
                ckpt.main_net, tasks[0], config.action_table(), config.max_steps,
                config.f_threshold, greedy=True, noise_amplitudes=(0.0, 0.0),
                rng=None, povm=povm_for(1), gamma=config.gamma,
                encode_target=None if enc is None else enc[0],
            )
            trajectories[name][model] = _record_to_trajectory(record, config)
    return {"table": table, "trajectories": trajectories}
