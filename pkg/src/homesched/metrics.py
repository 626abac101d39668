"""Net-consumption metrics: grid-side trace, SD, PAR, and daily cost."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MetricsError
from .plan import SchedulePlan


def sd(values) -> float:
    """Population standard deviation (divisor = length)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise MetricsError("standard deviation of an empty series is undefined")
    return float(np.std(arr))


def par(values) -> float:
    """Peak-to-average ratio; undefined when the mean is not positive."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise MetricsError("peak-to-average of an empty series is undefined")
    mean = float(arr.mean())
    if mean <= 0.0:
        raise MetricsError(f"peak-to-average undefined: series mean {mean:.6g} <= 0")
    return float(arr.max()) / mean


def daily_cost(buy, sell, prices, dt_hours: float, sell_price_multiplier: float = 1.0) -> float:
    """Priced grid exchange: sum of (buy - multiplier*sell) * price * step hours."""
    buy = np.asarray(buy, dtype=float)
    sell = np.asarray(sell, dtype=float)
    prices = np.asarray(prices, dtype=float)
    if not (buy.shape == sell.shape == prices.shape):
        raise MetricsError("buy, sell, and price series must share a length")
    return float(((buy - sell_price_multiplier * sell) * prices).sum() * dt_hours)


@dataclass
class NetTrace:
    """Per-step net consumption of the household, grid-side sign convention."""

    values: np.ndarray
    dt_hours: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    @property
    def average(self) -> float:
        return float(self.values.mean())

    @property
    def peak(self) -> float:
        return float(self.values.max())

    def sd(self) -> float:
        return sd(self.values)

    def par(self) -> float:
        return par(self.values)

    def par_or_note(self) -> tuple[float | None, str]:
        """PAR value, or None paired with the reason it is undefined."""
        try:
            return self.par(), ""
        except MetricsError as exc:
            return None, str(exc)


def net_trace(plan: SchedulePlan) -> NetTrace:
    """Consumption minus PV output and delivered storage discharge.

    Spilled PV is excluded from the PV term, so the result equals the
    grid exchange (buy - sell) step by step.
    """
    consumption = plan.consumption()
    pv = plan.pv_use + plan.pv_sell
    storage = (plan.ess_to_house + plan.ess_to_grid
               + plan.ev_to_house + plan.ev_to_grid)
    if not (consumption.shape == pv.shape == storage.shape):
        raise MetricsError("plan traces disagree on horizon length")
    return NetTrace(values=consumption - pv - storage, dt_hours=plan.dt_hours)


def plan_cost(plan: SchedulePlan) -> float:
    """Daily cost of a plan under its own tariff."""
    return daily_cost(plan.grid_buy, plan.grid_sell, plan.prices,
                      plan.dt_hours, plan.sell_price_multiplier)
