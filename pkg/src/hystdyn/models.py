"""Estimator-style front end over the functional training and baseline code.

Both estimators follow the scikit-learn parameter conventions (constructor
stores hyperparameters verbatim, fitted state lands in trailing-underscore
attributes, ``get_params`` / ``set_params`` work for grid sweeps), but they
fit on a whole :class:`~hystdyn.timeseries.TimeSeries` rather than a design
matrix: the estimator owns windowing, scaling and the chronological split.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import checkpoint
from .baseline import train_baseline
from .evaluation import LinearStepper, LstmStepper, one_step_eval
from .features import InputConfig
from .timeseries import TimeSeries
from .training import TrainConfig, train


def _require_series(series) -> TimeSeries:
    if not isinstance(series, TimeSeries):
        raise TypeError(f"expected a TimeSeries, got {type(series).__name__}")
    return series


class LstmDynamicsRegressor(BaseEstimator):
    """One-step angle predictor backed by the recurrent network.

    ``fit`` trains on the leading ``train_fraction`` of the series and keeps
    the epoch with the best held-out error. ``predict`` is teacher forced;
    use :meth:`make_stepper` with the evaluation helpers for open-loop runs.
    """

    def __init__(
        self,
        k: int = 3,
        epochs: int = 20,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
        bptt_length: int = 50,
        batch_timesteps: int = 100,
        train_fraction: float = 0.67,
        hidden_size: int = 64,
        dense_size: int = 64,
        unit_forget_bias: bool = True,
        seed: int = 0,
    ) -> None:
        self.k = k
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.bptt_length = bptt_length
        self.batch_timesteps = batch_timesteps
        self.train_fraction = train_fraction
        self.hidden_size = hidden_size
        self.dense_size = dense_size
        self.unit_forget_bias = unit_forget_bias
        self.seed = seed

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            weight_decay=self.weight_decay,
            bptt_length=self.bptt_length,
            batch_timesteps=self.batch_timesteps,
            train_fraction=self.train_fraction,
            hidden_size=self.hidden_size,
            dense_size=self.dense_size,
            unit_forget_bias=self.unit_forget_bias,
            seed=self.seed,
        )

    def fit(self, series: TimeSeries, y=None) -> "LstmDynamicsRegressor":
        result = train(_require_series(series), InputConfig(k=self.k), self._train_config())
        self.network_ = result.network
        self.scalers_ = result.scalers
        self.input_config_ = result.input_config
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.n_features_in_ = result.input_config.window_dim
        return self

    def predict(self, series: TimeSeries) -> np.ndarray:
        """One-step predictions in degrees for samples 1..end of ``series``."""
        check_is_fitted(self, "network_")
        report = one_step_eval(
            self.make_stepper(), _require_series(series), self.input_config_, self.scalers_
        )
        return report.theta_pred_deg

    def make_stepper(self) -> LstmStepper:
        check_is_fitted(self, "network_")
        return LstmStepper(self.network_)

    def save(self, path) -> None:
        check_is_fitted(self, "network_")
        checkpoint.save_lstm(
            path, self.network_, self.scalers_, self.input_config_, rng_seed=self.seed
        )


class LeastSquaresDynamicsRegressor(BaseEstimator):
    """Linear one-step predictor on the same windows; the quality floor any
    recurrent model has to beat."""

    def __init__(self, k: int = 3, train_fraction: float = 0.67) -> None:
        self.k = k
        self.train_fraction = train_fraction

    def fit(self, series: TimeSeries, y=None) -> "LeastSquaresDynamicsRegressor":
        result = train_baseline(
            _require_series(series), InputConfig(k=self.k), self.train_fraction
        )
        self.model_ = result.model
        self.scalers_ = result.scalers
        self.input_config_ = result.input_config
        self.train_mse_ = result.train_mse
        self.val_mse_ = result.val_mse
        self.n_features_in_ = result.input_config.window_dim
        return self

    def predict(self, series: TimeSeries) -> np.ndarray:
        check_is_fitted(self, "model_")
        report = one_step_eval(
            self.make_stepper(), _require_series(series), self.input_config_, self.scalers_
        )
        return report.theta_pred_deg

    def make_stepper(self) -> LinearStepper:
        check_is_fitted(self, "model_")
        return LinearStepper(self.model_)

    def save(self, path) -> None:
        check_is_fitted(self, "model_")
        checkpoint.save_linear(path, self.model_, self.scalers_, self.input_config_)
