"""Multichannel actuation/response records: resampling, splitting, CSV I/O.

A record holds one PWM duty cycle and one temperature per actuator (A and B)
plus the limb bending angle. Raw records carry explicit timestamps; a
:class:`TimeSeries` is the uniformly-sampled form every downstream consumer
expects.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError

CSV_HEADER = ("time_s", "u_a", "u_b", "temp_a_c", "temp_b_c", "theta_deg")
#: Columns that must be present in every input file.
REQUIRED_COLUMNS = ("time_s", "u_a", "temp_a_c", "theta_deg")
#: Columns a single-actuator dataset may omit; filled with zeros on load.
OPTIONAL_COLUMNS = ("u_b", "temp_b_c")

CHANNEL_NAMES = ("u_a", "u_b", "temp_a", "temp_b", "theta")

# Duty cycles may drift past [0, 1] by rounding noise only.
_DUTY_ATOL = 1e-9


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"channel {name!r} must be one-dimensional")
    return arr


@dataclass(frozen=True)
class RawRecord:
    """Possibly non-uniform record straight from a sensor log."""

    time_s: np.ndarray
    u_a: np.ndarray
    u_b: np.ndarray
    temp_a: np.ndarray
    temp_b: np.ndarray
    theta: np.ndarray
    unidirectional: bool = False

    def __post_init__(self):
        n = len(self.time_s)
        for name in ("u_a", "u_b", "temp_a", "temp_b", "theta"):
            if len(getattr(self, name)) != n:
                raise DataError(f"channel {name!r} length differs from time axis")

    def __len__(self) -> int:
        return len(self.time_s)


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled record with step ``dt`` seconds.

    Invariants enforced on construction: equal channel lengths, ``dt > 0``,
    duty cycles within [0, 1], all values finite.
    """

    dt: float
    u_a: np.ndarray
    u_b: np.ndarray
    temp_a: np.ndarray
    temp_b: np.ndarray
    theta: np.ndarray
    unidirectional: bool = False

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise DataError(f"dt must be a positive finite number, got {self.dt}")
        n = len(self.u_a)
        for name in CHANNEL_NAMES:
            arr = _as_float_array(getattr(self, name), name)
            if len(arr) != n:
                raise DataError(f"channel {name!r} length differs from u_a")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"channel {name!r} contains non-finite values")
            object.__setattr__(self, name, arr)
        for name in ("u_a", "u_b"):
            duty = getattr(self, name)
            if duty.size and (duty.min() < -_DUTY_ATOL or duty.max() > 1.0 + _DUTY_ATOL):
                raise DataError(f"duty cycle {name!r} outside [0, 1]")
            object.__setattr__(self, name, np.clip(duty, 0.0, 1.0))

    def __len__(self) -> int:
        return len(self.u_a)

    def time(self) -> np.ndarray:
        """Sample times in seconds, starting at 0."""
        return np.arange(len(self)) * self.dt

    def channel(self, name: str) -> np.ndarray:
        if name not in CHANNEL_NAMES:
            raise DataError(f"unknown channel {name!r}")
        return getattr(self, name)

    def slice(self, start: int, stop: int) -> "TimeSeries":
        """Contiguous sub-series over sample indices [start, stop)."""
        if not (0 <= start < stop <= len(self)):
            raise DataError(f"invalid slice [{start}, {stop}) for length {len(self)}")
        return replace(
            self,
            **{name: getattr(self, name)[start:stop] for name in CHANNEL_NAMES},
        )


def resample(raw: RawRecord, dt_target: float, max_gap_s: float = 1.0) -> TimeSeries:
    """Interpolate a raw record onto a uniform grid of step ``dt_target``.

    The grid starts at the first raw timestamp and is clipped to the raw time
    span; nothing is extrapolated. Gaps between consecutive raw samples longer
    than ``max_gap_s`` abort ingestion, since interpolating across them would
    fabricate dynamics.
    """
    if dt_target <= 0.0:
        raise DataError(f"dt_target must be positive, got {dt_target}")
    t = np.asarray(raw.time_s, dtype=float)
    if len(t) < 2:
        raise DataError(f"need at least 2 samples to resample, got {len(t)}")
    dts = np.diff(t)
    if np.any(dts <= 0.0):
        bad = int(np.argmax(dts <= 0.0))
        raise DataError(
            f"timestamps must be strictly increasing; violation after row {bad}"
            f" (t={t[bad]!r} -> t={t[bad + 1]!r})"
        )
    if np.any(dts > max_gap_s):
        bad = int(np.argmax(dts > max_gap_s))
        raise DataError(
            f"gap of {dts[bad]:.3f} s after t={t[bad]:.3f} s exceeds the"
            f" {max_gap_s:.3f} s limit"
        )
    span = t[-1] - t[0]
    n = int(math.floor(span / dt_target + 1e-9)) + 1
    grid = t[0] + np.arange(n) * dt_target
    channels = {
        name: np.interp(grid, t, np.asarray(getattr(raw, name), dtype=float))
        for name in CHANNEL_NAMES
    }
    return TimeSeries(dt=dt_target, unidirectional=raw.unidirectional, **channels)


def split_train_val(series: TimeSeries, train_fraction: float) -> tuple[TimeSeries, TimeSeries]:
    """Chronological split: first ``floor(n * train_fraction)`` samples train,
    the remainder validate. No shuffling, no overlap."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(series)
    n_train = int(math.floor(n * train_fraction))
    if n_train < 2 or n - n_train < 2:
        raise DataError(
            f"split of {n} samples at fraction {train_fraction} leaves a side"
            f" with fewer than 2 samples ({n_train}/{n - n_train})"
        )
    return series.slice(0, n_train), series.slice(n_train, n)


_CSV_TO_FIELD = {
    "time_s": "time_s",
    "u_a": "u_a",
    "u_b": "u_b",
    "temp_a_c": "temp_a",
    "temp_b_c": "temp_b",
    "theta_deg": "theta",
}


def load_csv(path) -> RawRecord:
    """Read a raw record from CSV.

    Header must contain ``time_s,u_a,temp_a_c,theta_deg``; ``u_b`` and
    ``temp_b_c`` may be omitted, in which case they are filled with zeros and
    the record is flagged unidirectional. Rows with missing/NaN cells are
    dropped here; :func:`resample` interpolates across the resulting gaps.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise DataError(f"{path}: missing required column(s) {', '.join(missing)}")
        absent_optional = [c for c in OPTIONAL_COLUMNS if c not in header]
        col_of = {name: header.index(name) for name in header}

        rows: list[list[float]] = []
        names = [c for c in CSV_HEADER if c in header]
        for lineno, cells in enumerate(reader, start=2):
            if not cells or all(c.strip() == "" for c in cells):
                continue
            parsed = []
            keep = True
            for name in names:
                cell = cells[col_of[name]].strip() if col_of[name] < len(cells) else ""
                if cell == "":
                    keep = False
                    break
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric value {cell!r} in column {name!r}"
                    ) from None
                if math.isnan(value):
                    keep = False
                    break
                parsed.append(value)
            if keep:
                rows.append(parsed)

    data = {name: np.array([r[i] for r in rows]) for i, name in enumerate(names)}
    for name in absent_optional:
        data[name] = np.zeros(len(rows))
    return RawRecord(
        unidirectional=bool(absent_optional),
        **{_CSV_TO_FIELD[c]: data[c] for c in CSV_HEADER},
    )


def save_csv(series: TimeSeries, path) -> None:
    """Write a uniform series in the canonical CSV layout.

    Values are written with ``repr`` so a load/save round trip reproduces
    every float bit-exactly, and reruns produce byte-identical files. A
    unidirectional series is written without the wire B columns, so loading
    it back recovers the unidirectional flag.
    """
    t = series.time()
    if series.unidirectional:
        names = ("time_s", "u_a", "temp_a_c", "theta_deg")
        columns = (t, series.u_a, series.temp_a, series.theta)
    else:
        names = CSV_HEADER
        columns = (t, series.u_a, series.u_b, series.temp_a, series.temp_b, series.theta)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(len(series)):
            writer.writerow([repr(float(col[i])) for col in columns])
