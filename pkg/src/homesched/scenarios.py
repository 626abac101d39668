"""Scenario definitions, runs, and the cross-scenario comparison report.

Four systems are compared under each tariff: the unmanaged base plan
(evaluated, not optimized) and three managed variants that differ only in
the non-controllable load series fed to the optimizer — the two
deterministic forecasts (max-of-averages, median-of-averages) and the
profile-based predictive forecast.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .baseplan import base_plan_values, make_candidate_hook
from .builder import build_model
from .errors import ModelError
from .household import HouseholdSpec, InflexibleLoads, PriceSignal
from .metrics import NetTrace, net_trace, plan_cost
from .milp import Solution, SolveOptions, solve_milp
from .plan import SchedulePlan, extract_plan

SCENARIO_IDS = ("base", "s1_max_avg", "s1_median_avg", "s2_predictive")
TARIFFS = ("TOU", "RTP")

# Which forecast series each scenario schedules against, and how the
# report tags that choice.
SERIES_KEY = {
    "base": "predictive",
    "s1_max_avg": "max_avg",
    "s1_median_avg": "median_avg",
    "s2_predictive": "predictive",
}
SERIES_SOURCE = {
    "base": "predictive",
    "s1_max_avg": "deterministic",
    "s1_median_avg": "deterministic",
    "s2_predictive": "predictive",
}

#: Managed scenarios run under a deterministic node budget so results are
#: reproducible; the report carries the honest status and gap.
DEFAULT_SCENARIO_OPTIONS = SolveOptions(relative_mip_gap=0.02, max_nodes=8)


@dataclass
class BasePlanParams:
    """Knobs of the unmanaged reference schedule.

    Appliances run at their preferred starts (default: earliest feasible),
    the EV charges at full rate on arrival, and the battery stays idle.
    """

    appliance_starts: dict[str, int] | None = None


@dataclass
class ScenarioSpec:
    """One (scenario, tariff) cell of the comparison."""

    id: str
    tariff: str
    household: HouseholdSpec
    series: dict[str, np.ndarray]
    prices: dict[str, PriceSignal]
    base_plan: BasePlanParams = field(default_factory=BasePlanParams)

    def realize(self) -> HouseholdSpec:
        """Household with this scenario's load series and tariff applied."""
        if self.id not in SCENARIO_IDS:
            raise ModelError(f"unknown scenario id {self.id!r}")
        if self.tariff not in self.prices:
            raise ModelError(f"no price signal for tariff {self.tariff!r}")
        key = SERIES_KEY[self.id]
        if key not in self.series:
            raise ModelError(f"scenario {self.id!r} needs the {key!r} load series")
        spec = copy.deepcopy(self.household)
        spec.price = copy.deepcopy(self.prices[self.tariff])
        spec.inflexible = InflexibleLoads(predictable=np.asarray(self.series[key], dtype=float))
        spec.validate()
        return spec


@dataclass
class ScenarioResult:
    """Solved or evaluated outcome of one scenario cell."""

    scenario_id: str
    tariff: str
    status: str
    gap: float
    series_source: str
    plan: SchedulePlan | None
    net: NetTrace | None
    cost: float | None
    average: float | None
    peak: float | None
    sd: float | None
    par: float | None
    par_note: str = ""
    #: Raw solver vector (variable id order) kept so callers can re-audit
    #: the schedule against the model without re-solving.
    values: np.ndarray | None = None


def run_scenario(spec: ScenarioSpec,
                 options: SolveOptions | None = None) -> ScenarioResult:
    """Build, solve (or evaluate for base), audit, and summarize one cell."""
    household = spec.realize()
    build = build_model(household)
    if spec.id == "base":
        values = base_plan_values(build, starts=spec.base_plan.appliance_starts)
        arrays = build.model.to_arrays()
        solution = Solution(status="evaluated", objective=float(arrays.cost @ values),
                            values=values, gap=0.0)
    else:
        solution = solve_milp(build.model, options or DEFAULT_SCENARIO_OPTIONS,
                              candidate_hook=make_candidate_hook(build))
    source = SERIES_SOURCE[spec.id]
    if solution.values is None:
        return ScenarioResult(spec.id, spec.tariff, solution.status, solution.gap,
                              source, None, None, None, None, None, None, None,
                              par_note=f"no schedule: solver status {solution.status}")
    plan = extract_plan(build, solution)
    net = net_trace(plan)
    par, note = net.par_or_note()
    return ScenarioResult(
        scenario_id=spec.id, tariff=spec.tariff, status=solution.status,
        gap=solution.gap, series_source=source, plan=plan, net=net,
        cost=plan_cost(plan), average=net.average, peak=net.peak,
        sd=net.sd(), par=par, par_note=note, values=solution.values)


@dataclass
class DeltaRow:
    """Percentage impact of one managed scenario against base, one tariff."""

    scenario_id: str
    tariff: str
    par_pct: float | None
    sd_pct: float | None
    cost_pct: float | None
    note: str = ""


def percentage_delta(managed: float | None, base: float | None) -> float | None:
    """(managed - base) / base * 100, None when either side is undefined."""
    if managed is None or base is None or base == 0.0:
        return None
    return (managed - base) / base * 100.0


@dataclass
class ScenarioReport:
    """All scenario results plus their deltas against base per tariff."""

    entries: list[ScenarioResult]
    deltas: list[DeltaRow]

    def entry(self, scenario_id: str, tariff: str) -> ScenarioResult:
        for e in self.entries:
            if e.scenario_id == scenario_id and e.tariff == tariff:
                return e
        raise KeyError((scenario_id, tariff))

    def summary_rows(self) -> list[dict]:
        rows = []
        for e in self.entries:
            rows.append({
                "scenario": e.scenario_id, "tariff": e.tariff,
                "average_kw": e.average, "peak_kw": e.peak,
                "sd_kw": e.sd, "par": e.par, "cost_usd": e.cost,
                "status": e.status, "gap": e.gap,
                "series_source": e.series_source, "note": e.par_note,
            })
        return rows

    def delta_rows(self) -> list[dict]:
        return [{
            "scenario": d.scenario_id, "tariff": d.tariff,
            "par_pct": d.par_pct, "sd_pct": d.sd_pct, "cost_pct": d.cost_pct,
            "note": d.note,
        } for d in self.deltas]

    def render_text(self) -> str:
        def fmt(v, width=9, digits=4):
            if v is None:
                return "n/a".rjust(width)
            return f"{v:.{digits}f}".rjust(width)

        lines = ["Net consumption summary", ""]
        header = (f"{'scenario':<16}{'tariff':<7}{'average':>9}{'peak':>9}"
                  f"{'SD':>9}{'PAR':>9}{'cost $':>10}  {'status':<10}{'source':<13}")
        lines.append(header)
        lines.append("-" * len(header))
        for e in self.entries:
            lines.append(
                f"{e.scenario_id:<16}{e.tariff:<7}{fmt(e.average)}{fmt(e.peak)}"
                f"{fmt(e.sd)}{fmt(e.par)}{fmt(e.cost, 10)}  {e.status:<10}"
                f"{e.series_source:<13}")
        lines += ["", "Impact against the base plan (%)", ""]
        header2 = f"{'scenario':<16}{'tariff':<7}{'PAR %':>9}{'SD %':>9}{'cost %':>9}"
        lines.append(header2)
        lines.append("-" * len(header2))
        for d in self.deltas:
            lines.append(f"{d.scenario_id:<16}{d.tariff:<7}"
                         f"{fmt(d.par_pct, 9, 2)}{fmt(d.sd_pct, 9, 2)}"
                         f"{fmt(d.cost_pct, 9, 2)}")
        return "\n".join(lines) + "\n"


def compare(household: HouseholdSpec,
            series: dict[str, np.ndarray],
            prices: dict[str, PriceSignal],
            base_plan: BasePlanParams | None = None,
            scenario_ids=SCENARIO_IDS,
            tariffs=TARIFFS,
            options: SolveOptions | None = None) -> ScenarioReport:
    """Run the scenario grid and compute deltas against base per tariff."""
    base_plan = base_plan or BasePlanParams()
    entries: list[ScenarioResult] = []
    for tariff in tariffs:
        for sid in scenario_ids:
            spec = ScenarioSpec(id=sid, tariff=tariff, household=household,
                                series=series, prices=prices, base_plan=base_plan)
            entries.append(run_scenario(spec, options))
    deltas: list[DeltaRow] = []
    for tariff in tariffs:
        base = next((e for e in entries
                     if e.scenario_id == "base" and e.tariff == tariff), None)
        if base is None:
            continue
        for e in entries:
            if e.tariff != tariff or e.scenario_id == "base":
                continue
            note = ""
            if e.par is None or base.par is None:
                note = e.par_note or base.par_note
            deltas.append(DeltaRow(
                scenario_id=e.scenario_id, tariff=tariff,
                par_pct=percentage_delta(e.par, base.par),
                sd_pct=percentage_delta(e.sd, base.sd),
                cost_pct=percentage_delta(e.cost, base.cost),
                note=note))
    return ScenarioReport(entries=entries, deltas=deltas)
