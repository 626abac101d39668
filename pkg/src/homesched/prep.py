"""Time-series cleanup and feature preparation for load histories.

Covers gap/outlier repair on metered kW series, robust scaling, the
chronological train/validation split, correlation ranking, and sliding
supervision windows.  Everything is plain numpy over 1-D series; day
handling is calendar-aligned via numpy datetime64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import InputError

# Per-point quality codes.
OBSERVED = 0
INTERPOLATED = 1   # value was missing and got filled in
CLIPPED = 2        # value was out of range / a spike and got replaced

QUALITY_NAMES = {OBSERVED: "observed", INTERPOLATED: "interpolated", CLIPPED: "clipped"}

_MINUTE = np.timedelta64(1, "m")


@dataclass
class TimeSeries:
    """Uniformly spaced series: start stamp, step length, values, quality."""

    start: np.datetime64
    step_minutes: int
    values: np.ndarray
    quality: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.start = np.datetime64(self.start, "m")
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise InputError("time series values must be one-dimensional")
        if int(self.step_minutes) <= 0:
            raise InputError("step_minutes must be positive")
        self.step_minutes = int(self.step_minutes)
        if self.quality is None:
            self.quality = np.zeros(len(self.values), dtype=np.uint8)
        else:
            self.quality = np.asarray(self.quality, dtype=np.uint8)
            if self.quality.shape != self.values.shape:
                raise InputError("quality flags must match values in length")

    def __len__(self) -> int:
        return len(self.values)

    def timestamps(self) -> np.ndarray:
        return self.start + np.arange(len(self.values)) * self.step_minutes * _MINUTE


def repair(series: TimeSeries, nominal_max: float) -> TimeSeries:
    """Replace missing and implausible points by linear interpolation.

    A point is invalid when it is NaN, negative, above ``nominal_max``, or a
    spike (more than five times both neighbors while above half of
    ``nominal_max``).  Invalid points are interpolated between the nearest
    valid neighbors; runs at either end take the nearest valid value.
    Missing points are flagged ``interpolated``, out-of-range and spike
    points ``clipped``.  Running repair on its own output changes nothing.
    """
    if nominal_max <= 0:
        raise InputError("nominal_max must be positive")
    x = series.values.copy()
    n = len(x)
    if n == 0:
        raise InputError("cannot repair an empty series")
    missing = np.isnan(x)
    out_of_range = (~missing) & ((x < 0.0) | (x > nominal_max))
    spike = np.zeros(n, dtype=bool)
    if n >= 3:
        left = x[:-2]
        mid = x[1:-1]
        right = x[2:]
        with np.errstate(invalid="ignore"):
            hit = (mid > 5.0 * left) & (mid > 5.0 * right) & (mid > 0.5 * nominal_max)
        spike[1:-1] = np.where(np.isnan(hit), False, hit)
    spike &= ~missing & ~out_of_range
    invalid = missing | out_of_range | spike
    if invalid.all():
        raise InputError("series has no valid points to interpolate from")

    valid_idx = np.nonzero(~invalid)[0]
    fixed = x.copy()
    bad_idx = np.nonzero(invalid)[0]
    fixed[bad_idx] = np.interp(bad_idx, valid_idx, x[valid_idx])

    quality = series.quality.copy()
    quality[missing] = INTERPOLATED
    quality[out_of_range | spike] = CLIPPED
    return TimeSeries(series.start, series.step_minutes, fixed, quality)


# -- robust scaling -----------------------------------------------------------


class RobustSeriesScaler(BaseEstimator, TransformerMixin):
    """Center by the median and scale by the interquartile range.

    Quartiles use linear interpolation between order statistics.  When the
    IQR collapses (constant-ish series) the scale falls back to 1 and
    ``degenerate_`` is set, so transform degrades to plain centering.
    """

    def __init__(self, tol: float = 1e-12):
        self.tol = tol

    def fit(self, X, y=None):
        x = self._as_series(X)
        if len(x) == 0:
            raise InputError("cannot fit a scaler on an empty series")
        if np.isnan(x).any():
            raise InputError("scaler input contains NaN; repair the series first")
        self.center_ = float(np.median(x))
        q1, q3 = np.percentile(x, [25.0, 75.0])  # linear interpolation
        self.iqr_ = float(q3 - q1)
        self.degenerate_ = self.iqr_ <= self.tol
        self.scale_ = 1.0 if self.degenerate_ else self.iqr_
        return self

    def transform(self, X):
        self._check_fitted()
        return (self._as_series(X) - self.center_) / self.scale_

    def inverse_transform(self, X):
        self._check_fitted()
        return self._as_series(X) * self.scale_ + self.center_

    def _check_fitted(self):
        if not hasattr(self, "center_"):
            raise InputError("scaler used before fit")

    @staticmethod
    def _as_series(X) -> np.ndarray:
        x = np.asarray(X, dtype=float)
        if x.ndim == 2 and x.shape[1] == 1:
            x = x[:, 0]
        if x.ndim != 1:
            raise InputError("scaler expects a one-dimensional series")
        return x


def fit_scaler(values) -> RobustSeriesScaler:
    return RobustSeriesScaler().fit(values)


def apply_scaler(scaler: RobustSeriesScaler, values) -> np.ndarray:
    return scaler.transform(values)


def invert_scaler(scaler: RobustSeriesScaler, values) -> np.ndarray:
    return scaler.inverse_transform(values)


# -- feature frames -----------------------------------------------------------


@dataclass
class FeatureFrame:
    """Aligned named columns over one shared time axis."""

    timestamps: np.ndarray                 # datetime64[m], shape (n,)
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype="datetime64[m]")
        n = len(self.timestamps)
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != (n,):
                raise InputError(f"column {name!r} length {col.shape} != time axis {n}")
            self.columns[name] = col

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def names(self) -> list[str]:
        return list(self.columns)


def split_frame(frame: FeatureFrame, ratio: float = 0.85) -> tuple[FeatureFrame, FeatureFrame]:
    """Chronological split: first ``floor(n * ratio)`` points, then the rest."""
    if not 0.0 < ratio < 1.0:
        raise InputError("split ratio must lie strictly between 0 and 1")
    cut = int(len(frame) * ratio)
    head = FeatureFrame(frame.timestamps[:cut], {k: v[:cut] for k, v in frame.columns.items()})
    tail = FeatureFrame(frame.timestamps[cut:], {k: v[cut:] for k, v in frame.columns.items()})
    return head, tail


def correlate(frame: FeatureFrame, target: str) -> list[tuple[str, float]]:
    """Rank non-target columns by |Pearson correlation| with the target.

    Zero-variance columns score 0.  Ties (including the all-zero case)
    break alphabetically so the ranking is reproducible.
    """
    if target not in frame.columns:
        raise InputError(f"unknown target column {target!r}")

    def effectively_constant(col: np.ndarray) -> bool:
        return col.std() <= 1e-12 * (1.0 + float(np.abs(col).max(initial=0.0)))

    y = frame.columns[target]
    y_flat = effectively_constant(y)
    out = []
    for name, col in frame.columns.items():
        if name == target:
            continue
        if y_flat or effectively_constant(col):
            r = 0.0
        else:
            r = float(np.corrcoef(col, y)[0, 1])
            if np.isnan(r):
                r = 0.0
        out.append((name, r))
    out.sort(key=lambda kv: (-abs(kv[1]), kv[0]))
    return out


def window_series(values, lookback: int, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Sliding supervision windows: returns (inputs, targets) with shapes
    (count, lookback) and (count, horizon), count = n - lookback - horizon + 1."""
    x = np.asarray(values, dtype=float)
    if lookback < 1 or horizon < 1:
        raise InputError("lookback and horizon must be at least 1")
    count = len(x) - lookback - horizon + 1
    if count < 1:
        raise InputError(
            f"series of length {len(x)} too short for lookback {lookback} + horizon {horizon}"
        )
    idx = np.arange(count)
    inputs = x[idx[:, None] + np.arange(lookback)[None, :]]
    targets = x[idx[:, None] + lookback + np.arange(horizon)[None, :]]
    return inputs, targets


def time_features(timestamps, holidays=()) -> dict[str, np.ndarray]:
    """Engineered calendar features for a datetime64 axis."""
    ts = np.asarray(timestamps, dtype="datetime64[m]")
    minutes = (ts - ts.astype("datetime64[D]")).astype("timedelta64[m]").astype(int)
    angle = 2.0 * np.pi * minutes / 1440.0
    days = ts.astype("datetime64[D]")
    weekday = (days.view("int64") + 3) % 7  # epoch day 0 was a Thursday
    holiday_set = np.array(sorted({np.datetime64(h, "D") for h in holidays}))
    is_holiday = np.isin(days, holiday_set) if holiday_set.size else np.zeros(len(ts), bool)
    return {
        "minute_sin": np.sin(angle),
        "minute_cos": np.cos(angle),
        "day_of_week": weekday.astype(float),
        "is_weekend": (weekday >= 5).astype(float),
        "is_holiday": is_holiday.astype(float),
    }


# -- day alignment ------------------------------------------------------------


def parse_clock(text: str) -> int:
    """'HH:MM' -> minute of day."""
    try:
        hh, mm = text.strip().split(":")
        minute = int(hh) * 60 + int(mm)
    except (ValueError, AttributeError) as exc:
        raise InputError(f"bad clock time {text!r}, expected HH:MM") from exc
    if not 0 <= minute < 1440:
        raise InputError(f"clock time {text!r} out of range")
    return minute


def day_matrix(series: TimeSeries, start_of_day: str = "00:00"):
    """Stack a series into whole days aligned at ``start_of_day``.

    Returns ``(matrix, day_starts)`` where matrix has one row per complete
    day (leading and trailing partial days are dropped) and ``day_starts``
    holds each row's first timestamp.
    """
    if 1440 % series.step_minutes != 0:
        raise InputError("step length must divide a day")
    per_day = 1440 // series.step_minutes
    boundary = parse_clock(start_of_day)
    ts = series.timestamps()
    minute_of_day = (ts - ts.astype("datetime64[D]")).astype("timedelta64[m]").astype(int)
    starts = np.nonzero(minute_of_day == boundary)[0]
    if starts.size == 0:
        raise InputError("series never crosses the configured start of day")
    first = int(starts[0])
    usable = (len(series) - first) // per_day
    if usable < 1:
        raise InputError("series does not cover one complete day")
    block = series.values[first : first + usable * per_day]
    matrix = block.reshape(usable, per_day)
    day_starts = ts[first : first + usable * per_day : per_day]
    return matrix, day_starts


def resample_mean(values: np.ndarray, from_minutes: int, to_minutes: int) -> np.ndarray:
    """Change a kW profile's step size, preserving average power.

    Coarsening averages whole blocks; refining repeats values.  The two
    step lengths must divide one another.
    """
    x = np.asarray(values, dtype=float)
    if from_minutes == to_minutes:
        return x.copy()
    if to_minutes % from_minutes == 0:
        k = to_minutes // from_minutes
        if len(x) % k != 0:
            raise InputError("profile length not divisible by the resampling factor")
        return x.reshape(-1, k).mean(axis=1)
    if from_minutes % to_minutes == 0:
        k = from_minutes // to_minutes
        return np.repeat(x, k)
    raise InputError(f"incompatible steps: {from_minutes} and {to_minutes} minutes")
