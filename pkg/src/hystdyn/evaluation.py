"""Model-agnostic evaluation: teacher-forced one-step error, open-loop
rollout with angle feedback, drift over a long rollout, and wall-clock
throughput.

Everything here drives a model through the small stepper interface, so the
recurrent network and the linear baseline share one code path.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .baseline import LinearModel
from .features import InputConfig, Scalers, window_matrix
from .lstm import LstmNetwork, step_forward
from .timeseries import TimeSeries

MIN_WALL_S = 1e-6

TRAJECTORY_HEADER = ("t_s", "theta_true_deg", "theta_pred_deg")


class Stepper(Protocol):
    """One scaled prediction per feature window, oldest window first."""

    def reset(self) -> None: ...

    def step(self, window: np.ndarray) -> float: ...


class LstmStepper:
    def __init__(self, network: LstmNetwork) -> None:
        self.network = network
        self.state = network.initial_state()

    def reset(self) -> None:
        self.state = self.network.initial_state()

    def step(self, window: np.ndarray) -> float:
        pred, self.state = step_forward(self.network, np.asarray(window, dtype=float), self.state)
        return pred


class LinearStepper:
    def __init__(self, model: LinearModel) -> None:
        self.model = model

    def reset(self) -> None:
        pass

    def step(self, window: np.ndarray) -> float:
        return float(self.model.predict(window)[0])


@dataclass
class EvalReport:
    t_s: np.ndarray
    theta_true_deg: np.ndarray
    theta_pred_deg: np.ndarray
    rmse_deg: float
    mse_scaled: float
    n_steps: int


def one_step_eval(
    stepper: Stepper, series: TimeSeries, cfg: InputConfig, scalers: Scalers
) -> EvalReport:
    """Predict each angle from measured history only (teacher forcing).

    Recurrent state threads through the whole series; it is reset once at the
    start.
    """
    X, y = window_matrix(series, cfg, scalers)
    stepper.reset()
    preds = np.empty(X.shape[0])
    for j in range(X.shape[0]):
        preds[j] = stepper.step(X[j])
    pred_deg = scalers.angle.inverse_transform(preds)
    true_deg = series.channel("theta")[1:]
    return EvalReport(
        t_s=series.time()[1:],
        theta_true_deg=true_deg,
        theta_pred_deg=pred_deg,
        rmse_deg=float(np.sqrt(np.mean((pred_deg - true_deg) ** 2))),
        mse_scaled=float(np.mean((preds - y) ** 2)),
        n_steps=X.shape[0],
    )


@dataclass
class RolloutResult:
    """Open-loop trajectory; rows cover predicted steps only."""

    t_s: np.ndarray
    theta_true_deg: np.ndarray
    theta_pred_deg: np.ndarray
    rmse_deg: float
    t0_index: int
    seed_theta_deg: float
    n_steps: int
    wall_time_s: float


def t0_index_for_time(series: TimeSeries, t0_s: float) -> int:
    """Sample index of the rollout start time on the series grid."""
    idx = int(round(t0_s / series.dt))
    if not 0 <= idx <= len(series) - 2:
        raise ValueError(f"rollout start {t0_s} s falls outside the series")
    return idx


def rollout(
    stepper: Stepper,
    series: TimeSeries,
    cfg: InputConfig,
    scalers: Scalers,
    t0_index: int,
) -> RolloutResult:
    """Run with measured angles up to t0, then feed predictions back.

    The warm-up phase is teacher forced and discarded. The angle at t0 itself
    is the measured seed; predictions start at the following sample and use
    the previous prediction as the angle input from then on. Measured duties
    and temperatures stay as inputs throughout.
    """
    X, _ = window_matrix(series, cfg, scalers)
    n_rows = X.shape[0]
    if not 0 <= t0_index <= n_rows - 1:
        raise ValueError(f"t0_index {t0_index} leaves no steps to predict")
    stepper.reset()
    for j in range(t0_index):
        stepper.step(X[j])

    n_steps = n_rows - t0_index
    preds = np.empty(n_steps)
    start = time.perf_counter()
    prev_scaled = X[t0_index, -1]  # measured seed angle, already scaled
    for k in range(n_steps):
        w = X[t0_index + k].copy()
        w[-1] = prev_scaled
        prev_scaled = stepper.step(w)
        preds[k] = prev_scaled
    wall = time.perf_counter() - start

    pred_deg = scalers.angle.inverse_transform(preds)
    theta = series.channel("theta")
    true_deg = theta[t0_index + 1 :]
    return RolloutResult(
        t_s=series.time()[t0_index + 1 :],
        theta_true_deg=true_deg,
        theta_pred_deg=pred_deg,
        rmse_deg=float(np.sqrt(np.mean((pred_deg - true_deg) ** 2))),
        t0_index=t0_index,
        seed_theta_deg=float(theta[t0_index]),
        n_steps=n_steps,
        wall_time_s=wall,
    )


@dataclass
class DriftReport:
    first_rmse_deg: float
    last_rmse_deg: float
    ratio: float
    window_steps: int


def drift_metric(result: RolloutResult, window_s: float, dt: float) -> DriftReport:
    """Compare rollout error over the opening and closing windows.

    A ratio near 1 means the open-loop error stays flat instead of
    accumulating. The windows overlap if the trajectory is shorter than two
    of them.
    """
    k = int(round(window_s / dt))
    if k < 1 or k > result.n_steps:
        raise ValueError(f"window of {window_s} s does not fit a {result.n_steps}-step rollout")
    err = result.theta_pred_deg - result.theta_true_deg
    first = float(np.sqrt(np.mean(err[:k] ** 2)))
    last = float(np.sqrt(np.mean(err[-k:] ** 2)))
    if first == 0.0:
        ratio = 1.0 if last == 0.0 else float("inf")
    else:
        ratio = last / first
    return DriftReport(first_rmse_deg=first, last_rmse_deg=last, ratio=ratio, window_steps=k)


@dataclass
class RealtimeReport:
    factor: float
    n_steps: int
    dt: float
    wall_time_s: float
    reliable: bool


def realtime_factor(n_steps: int, dt: float, wall_time_s: float) -> RealtimeReport:
    """Simulated seconds per wall-clock second. Timings below the clock's
    useful resolution are floored and flagged unreliable."""
    if n_steps < 1 or dt <= 0.0:
        raise ValueError("need at least one step and a positive dt")
    reliable = wall_time_s >= MIN_WALL_S
    return RealtimeReport(
        factor=n_steps * dt / max(wall_time_s, MIN_WALL_S),
        n_steps=n_steps,
        dt=dt,
        wall_time_s=wall_time_s,
        reliable=reliable,
    )


def save_trajectory_csv(path, t_s: np.ndarray, true_deg: np.ndarray, pred_deg: np.ndarray) -> None:
    if not len(t_s) == len(true_deg) == len(pred_deg):
        raise ValueError("trajectory columns differ in length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        for t, a, b in zip(t_s, true_deg, pred_deg):
            writer.writerow([repr(float(t)), repr(float(a)), repr(float(b))])


def save_report_json(path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
