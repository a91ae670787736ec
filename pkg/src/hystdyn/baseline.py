"""Linear one-step baseline fit by least squares on the same windows the
network sees, previous scaled angle included."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import InputConfig, Scalers, window_matrix
from .timeseries import TimeSeries, split_train_val

RIDGE_FALLBACK = 1e-9


@dataclass
class LinearModel:
    weights: np.ndarray
    intercept: float
    rank_deficient: bool = False

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.weights.shape[0]:
            raise ValueError(f"expected {self.weights.shape[0]} features, got {X.shape[1]}")
        return X @ self.weights + self.intercept


def normal_residual(model: LinearModel, X: np.ndarray, y: np.ndarray) -> float:
    """Stationarity check: the infinity norm of A^T (A w - y) with an
    intercept column appended. Zero at the exact least-squares optimum."""
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    w = np.append(model.weights, model.intercept)
    return float(np.max(np.abs(A.T @ (A @ w - y))))


def fit_least_squares(X: np.ndarray, y: np.ndarray) -> LinearModel:
    """Solve the normal equations; on a singular Gram matrix fall back to a
    tiny ridge term and flag the model as rank deficient."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"incompatible shapes {X.shape} and {y.shape}")
    if X.shape[0] <= X.shape[1]:
        raise ValueError(
            f"need more than {X.shape[1] + 1} rows to fit {X.shape[1]} features, got {X.shape[0]}"
        )
    A = np.hstack([X, np.ones((X.shape[0], 1))])
    gram = A.T @ A
    rhs = A.T @ y
    rank_deficient = False
    try:
        w = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        rank_deficient = True
        w = np.linalg.solve(gram + RIDGE_FALLBACK * np.eye(gram.shape[0]), rhs)
    if not np.all(np.isfinite(w)):
        rank_deficient = True
        w = np.linalg.solve(gram + RIDGE_FALLBACK * np.eye(gram.shape[0]), rhs)
    return LinearModel(weights=w[:-1], intercept=float(w[-1]), rank_deficient=rank_deficient)


@dataclass
class BaselineResult:
    model: LinearModel
    scalers: Scalers
    input_config: InputConfig
    train_mse: float
    val_mse: float


def train_baseline(
    series: TimeSeries,
    input_config: InputConfig,
    train_fraction: float = 0.67,
) -> BaselineResult:
    """Fit the linear map on the leading split, mirroring the network's
    scaling and windowing so errors are directly comparable."""
    train_part, val_part = split_train_val(series, train_fraction)
    scalers = Scalers.fit(train_part)
    x_train, y_train = window_matrix(train_part, input_config, scalers)
    x_val, y_val = window_matrix(val_part, input_config, scalers)
    model = fit_least_squares(x_train, y_train)
    train_mse = float(np.mean((model.predict(x_train) - y_train) ** 2))
    val_mse = float(np.mean((model.predict(x_val) - y_val) ** 2))
    return BaselineResult(
        model=model,
        scalers=scalers,
        input_config=input_config,
        train_mse=train_mse,
        val_mse=val_mse,
    )
