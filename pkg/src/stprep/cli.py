"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .config import load_config
from .dataset import build_dataset, load_dataset, save_dataset
from .errors import ConfigError, DataFormatError, NumericalError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="stprep", description="Pulse-sequence design for qubit state preparation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="generate a state pool and task splits")
    p.add_argument("--qubits", type=int, choices=(1, 2), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--train-n", type=int, default=100)
    p.add_argument("--val-n", type=int, default=100)

    p = sub.add_parser("train", help="run the training loop")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--resume", type=Path, default=None)
    p.add_argument("--timing", action="store_true",
                   help="record real wall seconds in metrics.csv (breaks byte-reproducibility)")

    p = sub.add_parser("eval", help="greedy evaluation over a dataset split")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--split", choices=("train", "validation", "test"), required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--noise-charge", type=float, default=0.0)
    p.add_argument("--noise-nuclear", type=float, default=0.0)
    p.add_argument("--repeats", type=int, default=1)

    p = sub.add_parser("noise-sweep", help="average fidelity vs noise amplitude")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--kind", choices=("charge", "nuclear", "both"), required=True)
    p.add_argument("--delta-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--repeats", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("table2", help="fixed-target vs adaptive model comparison")
    p.add_argument("--aqsp", type=Path, required=True)
    p.add_argument("--usp", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--data", type=Path, default=None,
                   help="dataset override; defaults to the path recorded in the checkpoints")

    p = sub.add_parser("export-traj", help="export one greedy pulse trajectory")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--pair", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)

    return parser


def _cmd_gen_data(args) -> int:
    if args.seed < 0:
        raise ConfigError("seed must be non-negative")
    ds = build_dataset(args.qubits, args.seed, train_n=args.train_n, val_n=args.val_n)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds.states)} states, {len(ds.pairs)} pairs "
          f"({ds.split_size('train')}/{ds.split_size('validation')}/{ds.split_size('test')}) to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    config = load_config(args.config)
    dataset = load_dataset(args.data)
    resume = harness.load_checkpoint(args.resume) if args.resume else None
    ckpt, metrics = harness.train(
        config, dataset, out_dir=args.out_dir, resume=resume,
        record_timing=args.timing, data_path=str(args.data.resolve()),
    )
    if metrics:
        last = metrics[-1]
        print(f"episode {last.episode}: validation fidelity {last.avg_validation_fidelity:.4f}, "
              f"total reward {last.avg_validation_total_reward:.4f}")
    print(f"final checkpoint: {args.out_dir / 'checkpoint.json'}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    ckpt = harness.load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.data)
    if dataset.qubits != ckpt.config.qubits:
        raise ConfigError("dataset and checkpoint qubit counts differ")
    tasks = dataset.tasks(args.split)
    rng = np.random.default_rng(ckpt.config.seed)
    avg, per_task, _ = harness.evaluate(
        ckpt, tasks, noise=(args.noise_charge, args.noise_nuclear),
        repeats=args.repeats, rng=rng,
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    harness.write_eval_rows(dataset.splits[args.split], per_task, args.out)
    print(f"{args.split}: {len(tasks)} tasks, average fidelity {avg:.6f}")
    return EXIT_OK


def _cmd_noise_sweep(args) -> int:
    ckpt = harness.load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.data)
    if dataset.qubits != ckpt.config.qubits:
        raise ConfigError("dataset and checkpoint qubit counts differ")
    if args.steps < 1:
        raise ConfigError("steps must be positive")
    if args.delta_max < 0:
        raise ConfigError("delta-max must be non-negative")
    tasks = dataset.tasks("test")
    amplitudes = np.linspace(0.0, args.delta_max, args.steps)
    rng = np.random.default_rng(ckpt.config.seed)
    rows = harness.noise_sweep(ckpt, tasks, args.kind, amplitudes, args.repeats, rng)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    harness.write_noise_rows(rows, args.out)
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    return EXIT_OK


def _load_table2_dataset(args, aqsp, usp):
    candidates = [args.data] if args.data else [aqsp.data_path, usp.data_path]
    for c in candidates:
        if c:
            return load_dataset(c)
    raise DataFormatError(
        "no dataset available: pass --data or train the checkpoints with a recorded data path"
    )


def _cmd_table2(args) -> int:
    aqsp = harness.load_checkpoint(args.aqsp)
    usp = harness.load_checkpoint(args.usp)
    dataset = _load_table2_dataset(args, aqsp, usp)
    report = harness.table2_suite(aqsp, usp, dataset)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w") as f:
        json.dump(report, f, indent=2)
    print(f"{'task':<15}{'usp':>10}{'aqsp':>10}")
    for task, row in report["table"].items():
        u = f"{row['usp']:.4f}" if "usp" in row else "-"
        a = f"{row['aqsp']:.4f}" if "aqsp" in row else "-"
        print(f"{task:<15}{u:>10}{a:>10}")
    return EXIT_OK


def _cmd_export_traj(args) -> int:
    ckpt = harness.load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.data)
    if dataset.qubits != ckpt.config.qubits:
        raise ConfigError("dataset and checkpoint qubit counts differ")
    traj = harness.export_trajectory(ckpt, dataset, args.pair)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w") as f:
        json.dump(traj, f, indent=2)
    print(f"pair {args.pair}: {len(traj['actions'])} pulses, final fidelity {traj['final_fidelity']:.6f}")
    return EXIT_OK


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "noise-sweep": _cmd_noise_sweep,
    "table2": _cmd_table2,
    "export-traj": _cmd_export_traj,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
