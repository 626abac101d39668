"""Seeded synthetic fixtures: load history, prices, weather, and a household.

Stands in for a metered dataset.  Daily load is a two-peak residential
curve (morning and evening) with weekday/weekend structure and seeded
noise; PV irradiance is a daylight bell; tariffs are a peak/off-peak TOU
ladder and a smooth RTP curve.  Everything is deterministic in the seed.
"""

from __future__ import annotations

import numpy as np

from .household import (AppliancePhaseProgram, EssConfig, EvConfig, GridLimits,
                        Horizon, HouseholdSpec, HvacConfig, InflexibleLoads,
                        PhaseSpec, PriceSignal, PvConfig)
from .prep import TimeSeries


def _bell(t: np.ndarray, center: float, width: float) -> np.ndarray:
    return np.exp(-0.5 * ((t - center) / width) ** 2)


def daily_load_profile(steps: int, weekend: bool, rng: np.random.Generator) -> np.ndarray:
    """One day of non-controllable load (kW): base + morning/evening peaks."""
    hours = np.arange(steps) * 24.0 / steps
    base = 0.25 + 0.05 * np.sin(hours / 24.0 * 2 * np.pi)
    morning = (0.5 if weekend else 0.9) * _bell(hours, 7.5 if not weekend else 9.5, 1.2)
    evening = 1.4 * _bell(hours, 19.0, 1.8)
    midday = (0.6 if weekend else 0.15) * _bell(hours, 13.0, 2.0)
    noise = rng.normal(0.0, 0.04, steps)
    return np.maximum(base + morning + evening + midday + noise, 0.0)


def load_history(days: int, steps_per_day: int = 96, seed: int = 0,
                 start: str = "2024-01-01T00:00") -> TimeSeries:
    """Multi-day load history starting on a Monday by default."""
    rng = np.random.default_rng(seed)
    start64 = np.datetime64(start, "m")
    day_idx = (start64.astype("datetime64[D]").astype(int) - 4) % 7  # 1970-01-01 was a Thursday
    chunks = []
    for d in range(days):
        weekend = (day_idx + d) % 7 >= 5
        chunks.append(daily_load_profile(steps_per_day, weekend, rng))
    values = np.concatenate(chunks)
    return TimeSeries(start=start64, step_minutes=1440 // steps_per_day, values=values)


def tou_prices(steps: int, off_peak: float = 0.08, mid: float = 0.15,
               peak: float = 0.30) -> np.ndarray:
    """Three-level time-of-use ladder: night valley, day shoulder, evening peak."""
    hours = np.arange(steps) * 24.0 / steps
    prices = np.full(steps, mid)
    prices[(hours < 6.0)] = off_peak
    prices[(hours >= 22.0)] = off_peak
    prices[(hours >= 17.0) & (hours < 21.0)] = peak
    return prices


def rtp_prices(steps: int, seed: int = 0, low: float = 0.05, high: float = 0.38) -> np.ndarray:
    """Smooth real-time price curve: daily shape plus seeded wiggle."""
    rng = np.random.default_rng(seed)
    hours = np.arange(steps) * 24.0 / steps
    shape = 0.4 + 0.45 * _bell(hours, 18.0, 3.0) + 0.25 * _bell(hours, 8.0, 2.0)
    wiggle = rng.normal(0.0, 0.03, steps)
    smooth = np.convolve(wiggle, np.ones(5) / 5.0, mode="same")
    curve = np.clip(shape + smooth, 0.0, 1.0)
    return low + (high - low) * curve


def summer_outdoor(steps: int, low: float = 74.0, high: float = 96.0) -> np.ndarray:
    """Outdoor temperature (°F): cool pre-dawn, hot late afternoon."""
    hours = np.arange(steps) * 24.0 / steps
    return low + (high - low) * 0.5 * (1 - np.cos((hours - 4.0) / 24.0 * 2 * np.pi))


def clear_sky_irradiance(steps: int, peak_kw_m2: float = 0.85) -> np.ndarray:
    """Daylight irradiance bell (kW/m^2), zero before 6h and after 18h."""
    hours = np.arange(steps) * 24.0 / steps
    lit = np.sin((hours - 6.0) / 12.0 * np.pi)
    return peak_kw_m2 * np.clip(lit, 0.0, None)


def household_fixture(steps: int = 96, seed: int = 0,
                      with_ev: bool = True, with_ess: bool = True,
                      with_hvac: bool = True, with_pv: bool = True) -> HouseholdSpec:
    """A fully-featured household on the given horizon, deterministic in seed."""
    step_minutes = 1440 // steps
    hz = Horizon(steps=steps, step_minutes=step_minutes)
    rng = np.random.default_rng(seed + 1)

    def s(step96: int) -> int:
        return max(1, step96 * steps // 96)

    def d(minutes: int) -> int:
        # Snap a physical duration up onto the step grid.
        return max(step_minutes, -(-minutes // step_minutes) * step_minutes)

    washer = AppliancePhaseProgram(
        name="washer",
        phases=[PhaseSpec(0.15, d(15)), PhaseSpec(2.0, d(30)), PhaseSpec(0.3, d(30)),
                PhaseSpec(0.15, d(15))],
        earliest_start=s(32), latest_finish=s(72))
    dryer = AppliancePhaseProgram(
        name="dryer", phases=[PhaseSpec(2.2, d(60)), PhaseSpec(0.75, d(15))],
        earliest_start=s(36), latest_finish=s(88), chained_after="washer")
    dishwasher = AppliancePhaseProgram(
        name="dishwasher", phases=[PhaseSpec(1.8, d(45)), PhaseSpec(0.6, d(30))],
        earliest_start=s(56), latest_finish=s(92))
    spec = HouseholdSpec(
        horizon=hz,
        grid=GridLimits(buy_max=20.0, sell_max=10.0),
        sell_price_multiplier=0.9,
        inflexible=InflexibleLoads(
            predictable=daily_load_profile(steps, weekend=False, rng=rng)),
        appliances=[washer, dryer, dishwasher],
        ess=EssConfig(capacity_max=13.5, charge_max=4.05, discharge_max=4.05,
                      efficiency=0.95, initial_soc=6.75) if with_ess else None,
        ev=EvConfig(capacity_max=24.0, charge_max=7.2, discharge_max=7.2,
                    return_soc=9.0, depart_step=s(32), return_step=s(72),
                    efficiency=0.95) if with_ev else None,
        # Coarse grids get a wider band: one step of Half-load cooling moves
        # the room by several degrees, so a narrow band has no feasible mode.
        hvac=HvacConfig(t_initial=73.0,
                        comfort_min=68.0 if step_minutes < 60 else 62.0,
                        comfort_max=77.0 if step_minutes < 60 else 79.0,
                        outdoor=summer_outdoor(steps),
                        cool_levels=[4.2, 1.9, 0.04]) if with_hvac else None,
        pv=PvConfig(efficiency=0.18, area_m2=28.0,
                    irradiance=clear_sky_irradiance(steps)) if with_pv else None,
    )
    return spec


def scenario_series(history: TimeSeries, horizon: Horizon,
                    window: int = 5) -> dict[str, np.ndarray]:
    """The three forecast series the scenario grid consumes."""
    from .forecast import (MaxAvgForecaster, MedianAvgForecaster,
                           SeasonalProfileForecaster)
    out = {}
    for key, cls in (("max_avg", MaxAvgForecaster),
                     ("median_avg", MedianAvgForecaster),
                     ("predictive", SeasonalProfileForecaster)):
        model = cls(window=window)
        model.fit(history)
        out[key] = model.predict(horizon)
    return out
