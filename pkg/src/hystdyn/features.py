"""Input-space selection, feature-window assembly, and min-max scaling.

Four input spaces are supported, selected by ``k``:

===  =============================
k    features, in order
===  =============================
1    u_a
2    u_a, temp_a
3    u_a, u_b
4    u_a, temp_a, u_b, temp_b
===  =============================

The model input for sample ``t`` is the flat window
``[v(t), v(t-1), theta(t-1)]`` and its target is ``theta(t)``; angle and
temperature entries are scaled to the unit interval before they reach a
model, duty cycles are already unit-scaled by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.preprocessing import MinMaxScaler

from .errors import DataError
from .timeseries import TimeSeries

_FEATURES_BY_K = {
    1: ("u_a",),
    2: ("u_a", "temp_a"),
    3: ("u_a", "u_b"),
    4: ("u_a", "temp_a", "u_b", "temp_b"),
}

TEMP_CHANNELS = ("temp_a", "temp_b")
B_SIDE_CHANNELS = ("u_b", "temp_b")


@dataclass(frozen=True)
class InputConfig:
    """Input-space selector ``k`` in {1, 2, 3, 4}."""

    k: int

    def __post_init__(self):
        if self.k not in _FEATURES_BY_K:
            raise DataError(f"k must be one of 1..4, got {self.k}")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return _FEATURES_BY_K[self.k]

    @property
    def dim(self) -> int:
        """Number of per-step sensor/input features."""
        return len(self.feature_names)

    @property
    def window_dim(self) -> int:
        """Flat window length: current + previous features + previous angle."""
        return 2 * self.dim + 1

    @property
    def uses_temperature(self) -> bool:
        return self.k in (2, 4)

    @property
    def uses_actuator_b(self) -> bool:
        return self.k in (3, 4)


@dataclass(frozen=True)
class FeatureWindow:
    """One scaled model input row and its scaled target."""

    values: np.ndarray
    target: float


class AngleScaler(BaseEstimator, TransformerMixin):
    """Affine map sending the observed angle range onto [0, 1].

    ``transform`` maps the fitted minimum to 0 and maximum to 1;
    ``inverse_transform`` is its exact inverse. A constant angle channel has
    no usable range and is rejected at fit time.
    """

    def fit(self, X, y=None):
        theta = np.asarray(X, dtype=float).ravel()
        if theta.size < 2:
            raise DataError("angle scaler needs at least 2 samples")
        lo, hi = float(theta.min()), float(theta.max())
        if hi <= lo:
            raise DataError("angle channel is constant; cannot scale a zero range")
        self.theta_min_ = lo
        self.theta_max_ = hi
        return self

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.theta_min_) / (
            self.theta_max_ - self.theta_min_
        )

    def inverse_transform(self, X):
        return np.asarray(X, dtype=float) * (self.theta_max_ - self.theta_min_) + self.theta_min_

    @property
    def range_deg(self) -> float:
        return self.theta_max_ - self.theta_min_


@dataclass
class Scalers:
    """Angle scaler plus the per-channel temperature scaler fitted alongside it.

    Temperature channels are scaled with train-set min/max like the angle, but
    a constant channel (e.g. the idle actuator of a single-sided run) maps to
    zero instead of erroring.
    """

    angle: AngleScaler
    temperature: MinMaxScaler

    @classmethod
    def fit(cls, series: TimeSeries) -> "Scalers":
        angle = AngleScaler().fit(series.theta)
        temperature = MinMaxScaler().fit(np.column_stack([series.temp_a, series.temp_b]))
        return cls(angle=angle, temperature=temperature)

    def scale_temperature(self, temp_a: np.ndarray, temp_b: np.ndarray) -> np.ndarray:
        """Scale both temperature channels; returns an (n, 2) array."""
        return self.temperature.transform(np.column_stack([temp_a, temp_b]))

    def temperature_min_max(self) -> dict[str, tuple[float, float]]:
        mins, maxs = self.temperature.data_min_, self.temperature.data_max_
        return {
            "temp_a": (float(mins[0]), float(maxs[0])),
            "temp_b": (float(mins[1]), float(maxs[1])),
        }

    @classmethod
    def from_min_max(
        cls,
        theta_min: float,
        theta_max: float,
        temp_min_max: dict[str, tuple[float, float]],
    ) -> "Scalers":
        """Rebuild fitted scalers from stored extrema (checkpoint loading)."""
        angle = AngleScaler().fit([theta_min, theta_max])
        lo = [temp_min_max["temp_a"][0], temp_min_max["temp_b"][0]]
        hi = [temp_min_max["temp_a"][1], temp_min_max["temp_b"][1]]
        temperature = MinMaxScaler().fit(np.array([lo, hi]))
        return cls(angle=angle, temperature=temperature)


def input_vector(series: TimeSeries, t: int, cfg: InputConfig) -> np.ndarray:
    """Raw (unscaled) feature vector v(t), ordered per the table above."""
    if not 0 <= t < len(series):
        raise DataError(f"sample index {t} out of range for length {len(series)}")
    return np.array([series.channel(name)[t] for name in cfg.feature_names])


def _scaled_feature_matrix(series: TimeSeries, cfg: InputConfig, scalers: Scalers) -> np.ndarray:
    """(n_samples, dim) matrix of per-step features with temperatures scaled."""
    if cfg.uses_temperature:
        temps = scalers.scale_temperature(series.temp_a, series.temp_b)
        scaled = {"temp_a": temps[:, 0], "temp_b": temps[:, 1]}
    else:
        scaled = {}
    cols = [scaled.get(name, series.channel(name)) for name in cfg.feature_names]
    return np.column_stack(cols)


def v_pair_matrix(series: TimeSeries, cfg: InputConfig, scalers: Scalers) -> np.ndarray:
    """Rows ``[v(t), v(t-1)]`` (scaled) for t = 1 .. n-1.

    This is the window minus its trailing previous-angle entry; rollouts
    append that entry step by step.
    """
    v = _scaled_feature_matrix(series, cfg, scalers)
    return np.hstack([v[1:], v[:-1]])


def window_matrix(
    series: TimeSeries, cfg: InputConfig, scalers: Scalers
) -> tuple[np.ndarray, np.ndarray]:
    """All teacher-forced windows of a series.

    Returns ``(X, y)`` where row ``i`` of ``X`` is the scaled window targeting
    sample ``i + 1`` and ``y[i]`` is the scaled angle at that sample. A series
    of n samples yields exactly n - 1 windows.
    """
    if len(series) < 2:
        raise DataError("need at least 2 samples to build a window")
    theta_scaled = scalers.angle.transform(series.theta)
    X = np.hstack([v_pair_matrix(series, cfg, scalers), theta_scaled[:-1, None]])
    return X, theta_scaled[1:]


def build_feature_window(
    series: TimeSeries, t: int, cfg: InputConfig, scalers: Scalers
) -> FeatureWindow:
    """Single scaled window ``[v(t), v(t-1), theta(t-1)]`` with target theta(t)."""
    if t < 1:
        raise DataError("windows need a previous sample; t must be >= 1")
    if t >= len(series):
        raise DataError(f"sample index {t} out of range for length {len(series)}")
    v = _scaled_feature_matrix(series.slice(t - 1, t + 1), cfg, scalers)
    theta_scaled = scalers.angle.transform(series.theta[t - 1 : t + 1])
    values = np.concatenate([v[1], v[0], theta_scaled[:1]])
    return FeatureWindow(values=values, target=float(theta_scaled[1]))
