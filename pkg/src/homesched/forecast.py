"""Day-ahead load forecasting baselines.

Three estimators over multi-day kW histories: per-step maximum of smoothed
day profiles, per-step median, and a weekday/weekend group-mean profile.
All follow the fit/predict idiom so they can be swapped and grid-searched
uniformly; predictions are resampled to whatever horizon step the caller
schedules at.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import InputError
from .prep import TimeSeries, day_matrix, resample_mean

_MINUTE = np.timedelta64(1, "m")
_DAY = np.timedelta64(1440, "m")


def smooth_profile(profile: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with edge truncation; window=1 is identity."""
    if window < 1:
        raise InputError("smoothing window must be at least 1")
    if window == 1:
        return np.asarray(profile, dtype=float).copy()
    x = np.asarray(profile, dtype=float)
    half_lo = (window - 1) // 2
    half_hi = window // 2
    csum = np.concatenate([[0.0], np.cumsum(x)])
    n = len(x)
    lo = np.maximum(np.arange(n) - half_lo, 0)
    hi = np.minimum(np.arange(n) + half_hi + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def _is_weekend_day(day_starts: np.ndarray, holidays: frozenset) -> np.ndarray:
    days = day_starts.astype("datetime64[D]")
    weekday = (days.view("int64") + 3) % 7
    weekend = weekday >= 5
    if holidays:
        hol = np.array(sorted(holidays))
        weekend |= np.isin(days, hol)
    return weekend


class _ProfileForecaster(BaseEstimator):
    """Shared plumbing: stack history into smoothed day profiles."""

    def __init__(self, window: int = 5, start_of_day: str = "00:00"):
        self.window = window
        self.start_of_day = start_of_day

    def fit(self, history: TimeSeries, y=None):
        matrix, day_starts = day_matrix(history, self.start_of_day)
        if np.isnan(matrix).any():
            raise InputError("history contains NaN; repair it before fitting")
        self.step_minutes_ = history.step_minutes
        self.day_starts_ = day_starts
        self.profiles_ = np.vstack([smooth_profile(row, self.window) for row in matrix])
        self._aggregate()
        return self

    def _aggregate(self):
        raise NotImplementedError

    def _base_profile(self, target_date) -> np.ndarray:
        raise NotImplementedError

    def predict(self, horizon, target_date=None) -> np.ndarray:
        """Forecast one day at the horizon's resolution (kW per step)."""
        if not hasattr(self, "profiles_"):
            raise InputError("forecaster used before fit")
        profile = self._base_profile(target_date)
        out = resample_mean(profile, self.step_minutes_, horizon.step_minutes)
        if len(out) != horizon.steps:
            raise InputError(
                f"forecast length {len(out)} does not match horizon of {horizon.steps} steps"
            )
        return out

    def next_day(self) -> np.datetime64:
        """The first day after the fitted history; the natural target."""
        return (self.day_starts_[-1] + _DAY).astype("datetime64[D]")


class MaxAvgForecaster(_ProfileForecaster):
    """Per-step maximum across smoothed day profiles (conservative ceiling)."""

    def _aggregate(self):
        self.profile_ = self.profiles_.max(axis=0)

    def _base_profile(self, target_date):
        return self.profile_


class MedianAvgForecaster(_ProfileForecaster):
    """Per-step median across smoothed day profiles (typical day)."""

    def _aggregate(self):
        self.profile_ = np.median(self.profiles_, axis=0)

    def _base_profile(self, target_date):
        return self.profile_


class SeasonalProfileForecaster(_ProfileForecaster):
    """Weekday/weekend group mean; predicts with the target date's group.

    Configured holidays count as weekend days.  If the target's group has
    no history days, the overall mean stands in.
    """

    def __init__(self, window: int = 5, start_of_day: str = "00:00", holidays: tuple = ()):
        super().__init__(window=window, start_of_day=start_of_day)
        self.holidays = tuple(holidays)

    def _holiday_set(self) -> frozenset:
        return frozenset(np.datetime64(h, "D") for h in self.holidays)

    def _aggregate(self):
        weekend = _is_weekend_day(self.day_starts_, self._holiday_set())
        self.group_profiles_ = {}
        for label, mask in (("weekday", ~weekend), ("weekend", weekend)):
            if mask.any():
                self.group_profiles_[label] = self.profiles_[mask].mean(axis=0)
        self.overall_ = self.profiles_.mean(axis=0)

    def _base_profile(self, target_date):
        if target_date is None:
            target_date = self.next_day()
        day = np.datetime64(target_date, "D")
        weekend = bool(_is_weekend_day(np.array([day], dtype="datetime64[m]"),
                                       self._holiday_set())[0])
        label = "weekend" if weekend else "weekday"
        return self.group_profiles_.get(label, self.overall_)


def evaluate(predicted, actual) -> float:
    """Mean squared error between two equal-length series."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape:
        raise InputError(f"shape mismatch: predicted {p.shape} vs actual {a.shape}")
    if p.size == 0:
        raise InputError("cannot score empty series")
    return float(np.mean((p - a) ** 2))


@dataclass
class GridSearchEntry:
    params: dict
    mse: float


@dataclass
class GridSearchResult:
    best: BaseEstimator
    best_params: dict
    best_mse: float
    table: list[GridSearchEntry]


def grid_search(factory, grid: dict, history: TimeSeries,
                val_ratio: float = 0.15, start_of_day: str = "00:00") -> GridSearchResult:
    """Exhaustive search over ``grid`` (param name -> candidate list).

    Days are split chronologically: the last ``ceil(val_ratio * days)``
    whole days validate, the rest train.  Each candidate is scored by MSE
    of its day-ahead prediction against every validation day; the lowest
    MSE wins, ties preferring the smaller ``window`` and then the earlier
    combination in deterministic grid order.  The winner is refit on the
    full history before being returned.
    """
    matrix, day_starts = day_matrix(history, start_of_day)
    n_days = matrix.shape[0]
    n_val = max(1, int(np.ceil(n_days * val_ratio)))
    if n_val >= n_days:
        raise InputError(f"history of {n_days} day(s) is too short to hold out validation days")
    per_day = matrix.shape[1]
    split = n_days - n_val
    train = TimeSeries(day_starts[0], history.step_minutes, matrix[:split].ravel())

    @dataclass(frozen=True)
    class _Axis:
        steps: int
        step_minutes: int

    horizon = _Axis(per_day, history.step_minutes)

    names = sorted(grid)
    combos = [dict(zip(names, vals)) for vals in itertools.product(*(grid[k] for k in names))]
    if not combos:
        raise InputError("empty parameter grid")

    table = []
    best_idx = -1
    best_key = None
    for idx, params in enumerate(combos):
        est = factory(**params)
        est.fit(train)
        errs = []
        for d in range(split, n_days):
            pred = est.predict(horizon, target_date=day_starts[d].astype("datetime64[D]"))
            errs.append(np.mean((pred - matrix[d]) ** 2))
        mse = float(np.mean(errs))
        table.append(GridSearchEntry(params=params, mse=mse))
        key = (mse, params.get("window", 0), idx)
        if best_key is None or key < best_key:
            best_key = key
            best_idx = idx

    best_params = combos[best_idx]
    best = factory(**best_params).fit(history)
    return GridSearchResult(best=best, best_params=best_params,
                            best_mse=table[best_idx].mse, table=table)
