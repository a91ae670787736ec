"""Learned hysteretic dynamics for thermally actuated soft limbs.

The package covers the full loop: generate or load actuation recordings,
window them into one-step learning problems, train a small LSTM (or the
linear least-squares reference) on the scaled windows, and score either
model teacher forced or in open-loop rollout.
"""

from .baseline import BaselineResult, LinearModel, fit_least_squares, train_baseline
from .errors import CheckpointError, DataError, DivergenceError
from .evaluation import (
    DriftReport,
    EvalReport,
    LinearStepper,
    LstmStepper,
    RealtimeReport,
    RolloutResult,
    drift_metric,
    one_step_eval,
    realtime_factor,
    rollout,
)
from .features import AngleScaler, InputConfig, Scalers, build_feature_window, window_matrix
from .lstm import LstmNetwork, LstmState, init_network
from .models import LeastSquaresDynamicsRegressor, LstmDynamicsRegressor
from .plant import Limb, PiController, PlantParams, SmaWire, babble
from .timeseries import RawRecord, TimeSeries, load_csv, resample, save_csv, split_train_val
from .training import Adam, TrainConfig, TrainHistory, TrainResult, train

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AngleScaler",
    "BaselineResult",
    "CheckpointError",
    "DataError",
    "DivergenceError",
    "DriftReport",
    "EvalReport",
    "InputConfig",
    "LeastSquaresDynamicsRegressor",
    "Limb",
    "LinearModel",
    "LinearStepper",
    "LstmDynamicsRegressor",
    "LstmNetwork",
    "LstmState",
    "LstmStepper",
    "PiController",
    "PlantParams",
    "RawRecord",
    "RealtimeReport",
    "RolloutResult",
    "Scalers",
    "SmaWire",
    "TimeSeries",
    "TrainConfig",
    "TrainHistory",
    "TrainResult",
    "babble",
    "build_feature_window",
    "drift_metric",
    "fit_least_squares",
    "init_network",
    "load_csv",
    "one_step_eval",
    "realtime_factor",
    "resample",
    "rollout",
    "save_csv",
    "split_train_val",
    "train",
    "train_baseline",
    "window_matrix",
    "__version__",
]
