"""Command-line entry points.

Subcommands cover the whole loop: ``babble`` generates plant data, ``train``
fits the recurrent model, ``baseline`` fits the linear reference, ``eval``
scores a saved model, and ``compare`` runs both on one dataset.

Every run writes a small manifest next to its artifacts recording the
command line, the resolved seed, and checksums of the inputs. Exit codes:
0 success, 1 usage, 2 bad data or files, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import checkpoint
from .baseline import normal_residual, train_baseline
from .errors import DataError, DivergenceError
from .evaluation import (
    LinearStepper,
    LstmStepper,
    drift_metric,
    one_step_eval,
    realtime_factor,
    rollout,
    save_report_json,
    save_trajectory_csv,
    t0_index_for_time,
)
from .features import InputConfig, window_matrix
from .plant import PlantParams, babble
from .timeseries import TimeSeries, load_csv, resample, save_csv, split_train_val
from .training import TrainConfig, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

SEED_ENV = "HYSTDYN_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _resolve_seed(flag_value) -> int:
    """Explicit flag wins, then the environment, then 0."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_manifest(path, command: str, args: argparse.Namespace, seed, inputs, outputs) -> None:
    doc = {
        "command": command,
        "options": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "package_version": __version__,
        "seed": seed,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_series(path, dt: float) -> TimeSeries:
    return resample(load_csv(path), dt)


def _check_columns(cfg: InputConfig, series: TimeSeries) -> None:
    if cfg.uses_actuator_b and series.unidirectional:
        raise DataError(
            f"input space k={cfg.k} needs wire B columns, but the data has none"
        )


def _select_split(series: TimeSeries, which: str, train_fraction: float) -> TimeSeries:
    if which == "all":
        return series
    train_part, val_part = split_train_val(series, train_fraction)
    return train_part if which == "train" else val_part


def _train_config(args, seed: int) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        bptt_length=args.bptt_length,
        batch_timesteps=args.batch_timesteps,
        train_fraction=args.train_fraction,
        hidden_size=args.hidden_size,
        dense_size=args.dense_size,
        seed=seed,
    )


def cmd_babble(args) -> int:
    seed = _resolve_seed(args.seed)
    series = babble(
        duration_s=args.duration_s,
        seed=seed,
        params=PlantParams(dt=args.dt),
        noise=args.noise,
        single_sided=args.single_sided,
        target_range_deg=args.target_range_deg,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(series, out)
    _write_manifest(
        Path(str(out) + ".manifest.json"), "babble", args, seed, inputs=[], outputs=[out.name]
    )
    print(f"wrote {out} ({len(series)} samples, {args.duration_s:g} s, seed {seed})")
    return EXIT_OK


def cmd_train(args) -> int:
    seed = _resolve_seed(args.seed)
    series = _load_series(args.data, args.resample_dt)
    cfg = InputConfig(k=args.k)
    _check_columns(cfg, series)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def show(rec):
        print(
            f"epoch {rec.epoch:3d}  train_mse {rec.train_mse:.6f}  "
            f"val_mse {rec.val_mse:.6f}  val_rmse {rec.val_rmse_deg:.3f} deg"
        )

    result = train(series, cfg, _train_config(args, seed), progress=show)
    model_path = out_dir / "model.json"
    history_path = out_dir / "history.csv"
    checkpoint.save_lstm(model_path, result.network, result.scalers, cfg, rng_seed=seed)
    result.history.save_csv(history_path)
    _write_manifest(
        out_dir / "manifest.json", "train", args, seed,
        inputs=[args.data], outputs=[model_path.name, history_path.name],
    )
    best = result.history.records[result.best_epoch - 1]
    print(f"best epoch {result.best_epoch}: val_rmse {best.val_rmse_deg:.3f} deg")
    print(f"wrote {model_path} and {history_path}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    series = _load_series(args.data, args.resample_dt)
    cfg = InputConfig(k=args.k)
    _check_columns(cfg, series)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    result = train_baseline(series, cfg, args.train_fraction)
    train_part, _ = split_train_val(series, args.train_fraction)
    x_train, y_train = window_matrix(train_part, cfg, result.scalers)
    model_path = out_dir / "model.json"
    checkpoint.save_linear(model_path, result.model, result.scalers, cfg)
    report = {
        "model_type": "linear",
        "k": cfg.k,
        "train_mse": result.train_mse,
        "val_mse": result.val_mse,
        "val_rmse_deg": float(np.sqrt(result.val_mse)) * result.scalers.angle.range_deg,
        "rank_deficient": result.model.rank_deficient,
        "normal_residual": normal_residual(result.model, x_train, y_train),
    }
    report_path = out_dir / "report.json"
    save_report_json(report_path, report)
    _write_manifest(
        out_dir / "manifest.json", "baseline", args, None,
        inputs=[args.data], outputs=[model_path.name, report_path.name],
    )
    print(f"val_rmse {report['val_rmse_deg']:.3f} deg  (k={cfg.k}, linear)")
    print(f"wrote {model_path} and {report_path}")
    return EXIT_OK


def _make_stepper(ck: checkpoint.Checkpoint):
    if ck.model_type == "lstm":
        return LstmStepper(ck.network)
    return LinearStepper(ck.linear)


def cmd_eval(args) -> int:
    ck = checkpoint.load(args.model)
    series = _load_series(args.data, args.resample_dt)
    _check_columns(ck.input_config, series)
    part = _select_split(series, args.split, args.train_fraction)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report: dict = {
        "model_type": ck.model_type,
        "k": ck.input_config.k,
        "split": args.split,
        "n_samples": len(part),
        "dt": part.dt,
    }
    outputs = []

    if args.mode in ("one-step", "both"):
        one = one_step_eval(_make_stepper(ck), part, ck.input_config, ck.scalers)
        path = out_dir / "one_step.csv"
        save_trajectory_csv(path, one.t_s, one.theta_true_deg, one.theta_pred_deg)
        outputs.append(path.name)
        report["one_step"] = {"rmse_deg": one.rmse_deg, "n_steps": one.n_steps}
        print(f"one-step rmse {one.rmse_deg:.3f} deg over {one.n_steps} steps")

    if args.mode in ("rollout", "both"):
        t0 = t0_index_for_time(part, args.t0_s)
        roll = rollout(_make_stepper(ck), part, ck.input_config, ck.scalers, t0)
        path = out_dir / "rollout.csv"
        save_trajectory_csv(path, roll.t_s, roll.theta_true_deg, roll.theta_pred_deg)
        outputs.append(path.name)
        drift = drift_metric(roll, args.drift_window_s, part.dt)
        rt = realtime_factor(roll.n_steps, part.dt, roll.wall_time_s)
        report["rollout"] = {
            "rmse_deg": roll.rmse_deg,
            "t0_s": args.t0_s,
            "seed_theta_deg": roll.seed_theta_deg,
            "n_steps": roll.n_steps,
            "drift_first_rmse_deg": drift.first_rmse_deg,
            "drift_last_rmse_deg": drift.last_rmse_deg,
            "drift_ratio": drift.ratio,
            "realtime_factor": rt.factor,
            "realtime_reliable": rt.reliable,
            "wall_time_s": roll.wall_time_s,
        }
        print(
            f"rollout rmse {roll.rmse_deg:.3f} deg over {roll.n_steps} steps "
            f"({rt.factor:.1f}x realtime)"
        )

    report_path = out_dir / "report.json"
    save_report_json(report_path, report)
    outputs.append(report_path.name)
    _write_manifest(
        out_dir / "manifest.json", "eval", args, None,
        inputs=[args.model, args.data], outputs=outputs,
    )
    print(f"wrote {report_path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    seed = _resolve_seed(args.seed)
    series = _load_series(args.data, args.resample_dt)
    cfg = InputConfig(k=args.k)
    _check_columns(cfg, series)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    lstm_result = train(series, cfg, _train_config(args, seed))
    linear_result = train_baseline(series, cfg, args.train_fraction)
    _, val_part = split_train_val(series, args.train_fraction)

    lstm_eval = one_step_eval(
        LstmStepper(lstm_result.network), val_part, cfg, lstm_result.scalers
    )
    linear_eval = one_step_eval(
        LinearStepper(linear_result.model), val_part, cfg, linear_result.scalers
    )

    lstm_path = out_dir / "lstm.json"
    linear_path = out_dir / "linear.json"
    checkpoint.save_lstm(lstm_path, lstm_result.network, lstm_result.scalers, cfg, rng_seed=seed)
    checkpoint.save_linear(linear_path, linear_result.model, linear_result.scalers, cfg)
    report = {
        "k": cfg.k,
        "lstm_val_rmse_deg": lstm_eval.rmse_deg,
        "linear_val_rmse_deg": linear_eval.rmse_deg,
        "rmse_ratio": lstm_eval.rmse_deg / linear_eval.rmse_deg
        if linear_eval.rmse_deg > 0.0
        else float("inf"),
    }
    report_path = out_dir / "compare.json"
    save_report_json(report_path, report)
    _write_manifest(
        out_dir / "manifest.json", "compare", args, seed,
        inputs=[args.data], outputs=[lstm_path.name, linear_path.name, report_path.name],
    )
    print(
        f"k={cfg.k}: lstm {lstm_eval.rmse_deg:.3f} deg vs linear "
        f"{linear_eval.rmse_deg:.3f} deg (ratio {report['rmse_ratio']:.3f})"
    )
    return EXIT_OK


def _add_data_options(p, with_k: bool = True) -> None:
    p.add_argument("--data", required=True, help="input CSV recording")
    if with_k:
        p.add_argument("--k", type=int, choices=(1, 2, 3, 4), required=True,
                       help="input space: 1=duty, 2=+temp, 3=both duties, 4=all")
    p.add_argument("--resample-dt", type=float, default=0.1, metavar="S",
                   help="uniform grid step in seconds (default 0.1)")


def _add_train_options(p) -> None:
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--hidden-size", type=int, default=64)
    p.add_argument("--dense-size", type=int, default=64)
    p.add_argument("--bptt-length", type=int, default=50)
    p.add_argument("--batch-timesteps", type=int, default=100)
    p.add_argument("--train-fraction", type=float, default=0.67)
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default: ${SEED_ENV} or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hystdyn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("babble",
                       help="generate plant data under a babbling controller")
    p.add_argument("--duration-s", type=float, default=1800.0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--noise", action="store_true", help="add sensor noise to the recording")
    p.add_argument("--single-sided", action="store_true", help="drive wire A only")
    p.add_argument("--target-range-deg", type=float, default=40.0)
    p.set_defaults(func=cmd_babble)

    p = sub.add_parser("train", help="train the recurrent model")
    _add_data_options(p)
    _add_train_options(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("baseline", help="fit the linear baseline")
    _add_data_options(p)
    p.add_argument("--train-fraction", type=float, default=0.67)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="score a saved model")
    p.add_argument("--model", required=True, help="checkpoint JSON")
    _add_data_options(p, with_k=False)
    p.add_argument("--split", choices=("val", "train", "all"), default="val")
    p.add_argument("--train-fraction", type=float, default=0.67)
    p.add_argument("--mode", choices=("one-step", "rollout", "both"), default="both")
    p.add_argument("--t0-s", type=float, default=15.0,
                   help="rollout start, seconds from the split start")
    p.add_argument("--drift-window-s", type=float, default=10.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare",
                       help="train both models and report validation errors")
    _add_data_options(p)
    _add_train_options(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DivergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:
    sys.exit(main())
