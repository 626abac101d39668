"""Forecasting baselines: aggregation rules, grouping, scoring, grid search."""

from dataclasses import dataclass

import numpy as np
import pytest

from homesched.errors import InputError
from homesched.forecast import (
    GridSearchResult,
    MaxAvgForecaster,
    MedianAvgForecaster,
    SeasonalProfileForecaster,
    evaluate,
    grid_search,
    smooth_profile,
)
from homesched.prep import TimeSeries

MONDAY = np.datetime64("2018-06-04T00:00", "m")  # a Monday


@dataclass(frozen=True)
class Axis:
    steps: int
    step_minutes: int


def history_from_days(days, step=15, start=MONDAY):
    return TimeSeries(start, step, np.concatenate([np.asarray(d, float) for d in days]))


# -- smoothing ---------------------------------------------------------------

def test_smooth_window_one_is_identity():
    x = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    assert np.array_equal(smooth_profile(x, 1), x)


def test_smooth_matches_naive_loop():
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 5, 40)
    for w in (2, 3, 5, 8):
        got = smooth_profile(x, w)
        half_lo, half_hi = (w - 1) // 2, w // 2
        want = np.array([
            np.mean(x[max(0, i - half_lo): min(len(x), i + half_hi + 1)])
            for i in range(len(x))
        ])
        assert np.allclose(got, want)


# -- aggregation rules ---------------------------------------------------------

def test_max_avg_takes_pointwise_maximum():
    per_day = 96
    d1 = np.full(per_day, 1.0)
    d2 = np.full(per_day, 3.0)
    d3 = np.full(per_day, 2.0)
    hist = history_from_days([d1, d2, d3])
    est = MaxAvgForecaster(window=1).fit(hist)
    pred = est.predict(Axis(96, 15))
    assert np.allclose(pred, 3.0)


def test_median_avg_takes_pointwise_median():
    per_day = 96
    hist = history_from_days([np.full(per_day, v) for v in (1.0, 9.0, 2.0)])
    est = MedianAvgForecaster(window=1).fit(hist)
    assert np.allclose(est.predict(Axis(96, 15)), 2.0)


def test_max_never_below_median_across_seeded_histories():
    rng = np.random.default_rng(2024)
    axis = Axis(96, 15)
    for _ in range(50):
        days = [np.abs(rng.normal(1.5, 0.6, 96)) for _ in range(int(rng.integers(3, 9)))]
        hist = history_from_days(days)
        w = int(rng.choice([1, 3, 5]))
        mx = MaxAvgForecaster(window=w).fit(hist).predict(axis)
        md = MedianAvgForecaster(window=w).fit(hist).predict(axis)
        assert np.all(mx >= md - 1e-12)
        assert np.all(mx >= 0.0)


def test_predict_resamples_to_horizon_step():
    per_day = 96
    profile = np.arange(per_day, dtype=float)
    hist = history_from_days([profile, profile])
    est = MedianAvgForecaster(window=1).fit(hist)
    hourly = est.predict(Axis(24, 60))
    assert hourly.shape == (24,)
    assert hourly[0] == pytest.approx(np.mean(profile[:4]))
    fine = est.predict(Axis(288, 5))
    assert fine.shape == (288,)
    assert np.mean(fine) == pytest.approx(np.mean(profile))


def test_unusable_horizon_is_an_error():
    hist = history_from_days([np.ones(96)])
    est = MaxAvgForecaster(window=1).fit(hist)
    with pytest.raises(InputError):
        est.predict(Axis(96, 7))


# -- seasonal grouping ----------------------------------------------------------

def test_seasonal_profile_isolates_weekends():
    # Mon..Sun: weekdays flat 1.0, weekend poisoned with huge load.
    days = [np.full(96, 1.0) for _ in range(5)] + [np.full(96, 50.0), np.full(96, 60.0)]
    hist = history_from_days(days, start=MONDAY)
    est = SeasonalProfileForecaster(window=1).fit(hist)
    monday = np.datetime64("2018-06-11")
    saturday = np.datetime64("2018-06-16")
    assert np.allclose(est.predict(Axis(96, 15), target_date=monday), 1.0)
    assert np.allclose(est.predict(Axis(96, 15), target_date=saturday), 55.0)


def test_seasonal_profile_honors_holidays():
    days = [np.full(96, 1.0) for _ in range(5)] + [np.full(96, 9.0), np.full(96, 9.0)]
    hist = history_from_days(days, start=MONDAY)
    est = SeasonalProfileForecaster(window=1, holidays=("2018-06-12",)).fit(hist)
    # The holiday Tuesday predicts with the weekend group.
    assert np.allclose(est.predict(Axis(96, 15), target_date=np.datetime64("2018-06-12")), 9.0)


def test_seasonal_profile_falls_back_when_group_empty():
    days = [np.full(96, 2.0) for _ in range(4)]  # Mon-Thu only
    hist = history_from_days(days, start=MONDAY)
    est = SeasonalProfileForecaster(window=1).fit(hist)
    sat = np.datetime64("2018-06-09")
    assert np.allclose(est.predict(Axis(96, 15), target_date=sat), 2.0)


def test_default_target_is_day_after_history():
    days = [np.full(96, 1.0) for _ in range(5)] + [np.full(96, 7.0), np.full(96, 7.0)]
    hist = history_from_days(days, start=MONDAY)
    est = SeasonalProfileForecaster(window=1).fit(hist)
    assert str(est.next_day()) == "2018-06-11"
    # Next day is a Monday -> weekday group.
    assert np.allclose(est.predict(Axis(96, 15)), 1.0)


# -- scoring ---------------------------------------------------------------------

def test_evaluate_mse():
    assert evaluate([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert evaluate([0.0, 0.0], [3.0, 4.0]) == pytest.approx(12.5)
    with pytest.raises(InputError):
        evaluate([1.0], [1.0, 2.0])
    with pytest.raises(InputError):
        evaluate([], [])


def test_evaluate_self_is_zero_for_any_forecast():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 4, 96)
    assert evaluate(x, x) == 0.0


# -- grid search ------------------------------------------------------------------

def noisy_history(rng, n_days=12, noise=0.6, sharp=False):
    t = np.linspace(0, 2 * np.pi, 96, endpoint=False)
    base = 1.5 + np.sin(t) * 0.5
    if sharp:
        base = np.where((np.arange(96) >= 40) & (np.arange(96) < 48), 5.0, 0.5)
    days = [np.maximum(base + rng.normal(0, noise, 96), 0.0) for _ in range(n_days)]
    return history_from_days(days)


def test_grid_search_prefers_smoothing_for_noisy_flat_history():
    rng = np.random.default_rng(99)
    hist = noisy_history(rng, noise=0.8, sharp=False)
    res = grid_search(MedianAvgForecaster, {"window": [1, 9]}, hist)
    assert isinstance(res, GridSearchResult)
    assert res.best_params["window"] == 9
    assert len(res.table) == 2


def test_grid_search_prefers_sharp_profile_unsmoothed():
    rng = np.random.default_rng(100)
    hist = noisy_history(rng, noise=0.02, sharp=True)
    res = grid_search(MedianAvgForecaster, {"window": [1, 9]}, hist)
    assert res.best_params["window"] == 1


def test_grid_search_tie_prefers_smaller_window():
    # Constant history: every window scores identically.
    hist = history_from_days([np.full(96, 2.0) for _ in range(8)])
    res = grid_search(MedianAvgForecaster, {"window": [9, 3, 1]}, hist)
    assert res.best_params["window"] == 1
    assert res.best_mse == pytest.approx(0.0)


def test_grid_search_refits_winner_on_full_history():
    rng = np.random.default_rng(7)
    hist = noisy_history(rng, n_days=10)
    res = grid_search(MedianAvgForecaster, {"window": [1, 5]}, hist)
    assert res.best.profiles_.shape[0] == 10  # all days, not just the train split


def test_grid_search_needs_enough_days():
    hist = history_from_days([np.ones(96)])
    with pytest.raises(InputError):
        grid_search(MedianAvgForecaster, {"window": [1]}, hist)
