"""Turn a solver result back into per-step device schedules.

The plan is plain arrays (kW, kWh, degF) indexed by step, suitable for
metrics, reports, and CSV emission.  Extraction audits the solution: the
values must satisfy the model rows and reproduce the solver's objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .builder import BuildResult
from .errors import ModelError
from .milp import Solution, check_solution


@dataclass
class SchedulePlan:
    """One day of device schedules plus the tariff they were priced under."""

    steps: int
    step_minutes: int
    tariff_mode: str
    prices: np.ndarray
    sell_price_multiplier: float
    objective_cost: float
    grid_buy: np.ndarray
    grid_sell: np.ndarray
    pv_available: np.ndarray
    pv_use: np.ndarray
    pv_sell: np.ndarray
    pv_spill: np.ndarray
    ess_charge: np.ndarray
    ess_discharge: np.ndarray
    ess_to_house: np.ndarray
    ess_to_grid: np.ndarray
    ess_soc: np.ndarray | None
    ev_charge: np.ndarray
    ev_discharge: np.ndarray
    ev_to_house: np.ndarray
    ev_to_grid: np.ndarray
    ev_soc: np.ndarray | None
    appliance_power: dict[str, np.ndarray]
    appliance_phase: dict[str, np.ndarray]
    hvac_cool_kw: np.ndarray
    hvac_heat_kw: np.ndarray
    hvac_cool_mode: np.ndarray
    hvac_heat_mode: np.ndarray
    indoor_temp: np.ndarray | None
    inflexible: np.ndarray

    @property
    def dt_hours(self) -> float:
        return self.step_minutes / 60.0

    def appliance_total(self) -> np.ndarray:
        total = np.zeros(self.steps)
        for kw in self.appliance_power.values():
            total = total + kw
        return total

    def consumption(self) -> np.ndarray:
        """Total electrical demand per step, storage charging included (kW)."""
        return (self.inflexible + self.appliance_total()
                + self.hvac_cool_kw + self.hvac_heat_kw
                + self.ess_charge + self.ev_charge)

    def storage_to_house(self) -> np.ndarray:
        return self.ess_to_house + self.ev_to_house

    def cost(self) -> float:
        """Priced grid exchange: buy minus credited sales, in tariff currency."""
        net = self.grid_buy - self.sell_price_multiplier * self.grid_sell
        return float(np.sum(net * self.prices) * self.dt_hours)


def _dense(ids, values, steps) -> np.ndarray:
    out = np.zeros(steps)
    if ids is None:
        return out
    if isinstance(ids, dict):
        for t, vid in ids.items():
            out[t] = values[vid]
    else:
        out[:] = values[np.asarray(ids)]
    return out


def _mode_trace(mode_ids: dict, values, steps) -> np.ndarray:
    out = np.full(steps, -1, dtype=np.int64)
    for (level, t), vid in mode_ids.items():
        if round(values[vid]) == 1:
            out[t] = level
    return out


def extract_plan(build: BuildResult, solution: Solution,
                 audit_tol: float = 1e-5) -> SchedulePlan:
    """Read the device schedules out of a solved model.

    Raises :class:`ModelError` if the values violate the model or the
    re-priced cost disagrees with the solver's objective.
    """
    values = np.asarray(solution.values, dtype=float)
    model, ix, spec = build.model, build.index, build.spec
    report = check_solution(model, values, tol=audit_tol)
    if not report.ok(audit_tol):
        raise ModelError(
            f"solution violates the model: row {report.max_violation:.3e}, "
            f"bound {report.max_bound_violation:.3e}, "
            f"integrality {report.max_integrality_violation:.3e}")
    T = ix.steps
    hz = spec.horizon

    app_power, app_phase = {}, {}
    for name, run in ix.app_run.items():
        app_power[name] = _dense(ix.app_power[name], values, T)
        phase = np.full(T, -1, dtype=np.int64)
        for k, cols in enumerate(run):
            for t, vid in cols.items():
                if round(values[vid]) == 1:
                    phase[t] = k
        app_phase[name] = phase

    ess_soc = values[np.asarray(ix.ess_soc)] if ix.ess_soc is not None else None
    ev_soc = None
    if ix.ev_soc:
        ev_soc = np.full(T + 1, np.nan)
        for k, vid in ix.ev_soc.items():
            ev_soc[k] = values[vid]

    pv_avail = spec.pv.available_kw(hz) if spec.pv is not None else np.zeros(T)

    plan = SchedulePlan(
        steps=T,
        step_minutes=hz.step_minutes,
        tariff_mode=spec.price.mode,
        prices=np.asarray(spec.price.values, dtype=float).copy(),
        sell_price_multiplier=spec.sell_price_multiplier,
        objective_cost=float(solution.objective),
        grid_buy=_dense(ix.buy, values, T),
        grid_sell=_dense(ix.sell, values, T),
        pv_available=np.asarray(pv_avail, dtype=float),
        pv_use=_dense(ix.pv_use, values, T),
        pv_sell=_dense(ix.pv_sell, values, T),
        pv_spill=_dense(ix.pv_spill, values, T),
        ess_charge=_dense(ix.ess_charge, values, T),
        ess_discharge=_dense(ix.ess_discharge, values, T),
        ess_to_house=_dense(ix.ess_to_house, values, T),
        ess_to_grid=_dense(ix.ess_to_grid, values, T),
        ess_soc=ess_soc,
        ev_charge=_dense(ix.ev_charge, values, T),
        ev_discharge=_dense(ix.ev_discharge, values, T),
        ev_to_house=_dense(ix.ev_to_house, values, T),
        ev_to_grid=_dense(ix.ev_to_grid, values, T),
        ev_soc=ev_soc,
        appliance_power=app_power,
        appliance_phase=app_phase,
        hvac_cool_kw=_dense(ix.hvac_cool_power, values, T),
        hvac_heat_kw=_dense(ix.hvac_heat_power, values, T),
        hvac_cool_mode=_mode_trace(ix.hvac_cool_mode, values, T),
        hvac_heat_mode=_mode_trace(ix.hvac_heat_mode, values, T),
        indoor_temp=(values[np.asarray(ix.indoor_temp)]
                     if ix.indoor_temp is not None else None),
        inflexible=spec.inflexible.total(),
    )
    repriced = plan.cost()
    scale = max(1.0, abs(solution.objective))
    if abs(repriced - solution.objective) > 1e-6 * scale:
        raise ModelError(
            f"re-priced plan cost {repriced!r} disagrees with solver "
            f"objective {solution.objective!r}")
    return plan
