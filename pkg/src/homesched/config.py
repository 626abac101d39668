"""JSON run configuration: one file holding the household tree and run block.

Keys mirror the household field names one-to-one; unknown keys are errors,
every applied default is recorded so the run log can echo it, and any
failure carries the dotted path of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .household import (AppliancePhaseProgram, EssConfig, EvConfig, GridLimits,
                        Horizon, HouseholdSpec, HvacConfig, InflexibleLoads,
                        PhaseSpec, PriceSignal, PvConfig)
from .milp import SolveOptions

_REQUIRED = object()


class _Reader:
    """Tracks consumed keys and applied defaults for one JSON object."""

    def __init__(self, obj, path: str, defaults: list):
        if not isinstance(obj, dict):
            raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
        self.obj = obj
        self.path = path
        self.defaults = defaults
        self.seen: set[str] = set()

    def _fetch(self, key: str, default):
        self.seen.add(key)
        if key in self.obj:
            return self.obj[key]
        if default is _REQUIRED:
            raise ConfigError(f"{self.path}.{key}".lstrip("."), "missing required field")
        self.defaults.append((f"{self.path}.{key}".lstrip("."), default))
        return default

    def number(self, key: str, default=_REQUIRED):
        value = self._fetch(key, default)
        if value is None or isinstance(value, bool) or not isinstance(value, (int, float)):
            if value is default and key not in self.obj:
                return value
            raise ConfigError(f"{self.path}.{key}".lstrip("."),
                              f"expected a number, got {type(value).__name__}")
        return float(value)

    def integer(self, key: str, default=_REQUIRED):
        value = self._fetch(key, default)
        if key not in self.obj:
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.path}.{key}".lstrip("."),
                              f"expected an integer, got {type(value).__name__}")
        return value

    def text(self, key: str, default=_REQUIRED):
        value = self._fetch(key, default)
        if key not in self.obj:
            return value
        if not isinstance(value, str):
            raise ConfigError(f"{self.path}.{key}".lstrip("."),
                              f"expected a string, got {type(value).__name__}")
        return value

    def series(self, key: str, default=_REQUIRED):
        """A number or a list of numbers (scalars broadcast downstream)."""
        value = self._fetch(key, default)
        if key not in self.obj:
            return value
        if isinstance(value, bool):
            raise ConfigError(f"{self.path}.{key}".lstrip("."), "expected numbers")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, list) and all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return [float(v) for v in value]
        raise ConfigError(f"{self.path}.{key}".lstrip("."),
                          "expected a number or a list of numbers")

    def child(self, key: str):
        """Sub-object reader, or None when the key is absent."""
        self.seen.add(key)
        if key not in self.obj or self.obj[key] is None:
            return None
        return _Reader(self.obj[key], f"{self.path}.{key}".lstrip("."), self.defaults)

    def items(self, key: str):
        """List of sub-object readers; absent key means empty list."""
        self.seen.add(key)
        value = self.obj.get(key, [])
        if not isinstance(value, list):
            raise ConfigError(f"{self.path}.{key}".lstrip("."),
                              f"expected a list, got {type(value).__name__}")
        base = f"{self.path}.{key}".lstrip(".")
        return [_Reader(v, f"{base}[{i}]", self.defaults) for i, v in enumerate(value)]

    def mapping(self, key: str):
        self.seen.add(key)
        value = self.obj.get(key, {})
        if not isinstance(value, dict):
            raise ConfigError(f"{self.path}.{key}".lstrip("."),
                              f"expected an object, got {type(value).__name__}")
        return value

    def finish(self):
        unknown = set(self.obj) - self.seen
        if unknown:
            name = sorted(unknown)[0]
            raise ConfigError(f"{self.path}.{name}".lstrip("."), "unknown field")


@dataclass
class RunConfig:
    """Run block: where inputs live, what to run, solver knobs, the seed."""

    price_files: dict[str, str] = field(default_factory=dict)
    history_dir: str | None = None
    scenarios: list[str] = field(default_factory=list)
    out_dir: str = "out"
    seed: int = 0
    solver: SolveOptions | None = None
    appliance_starts: dict[str, int] = field(default_factory=dict)
    forecast_window: int = 5
    applied_defaults: list = field(default_factory=list)


def parse_household(obj: dict, defaults: list | None = None) -> HouseholdSpec:
    """Build and validate a household from its JSON object tree."""
    defaults = defaults if defaults is not None else []
    r = _Reader(obj, "", defaults)

    hr = r.child("horizon")
    if hr is None:
        raise ConfigError("horizon", "missing required field")
    horizon = Horizon(steps=hr.integer("steps"),
                      step_minutes=hr.integer("step_minutes"),
                      start_of_day=hr.text("start_of_day", "00:00"))
    hr.finish()

    gr = r.child("grid")
    if gr is None:
        defaults.append(("grid", "buy_max=20.0 sell_max=10.0"))
        grid = GridLimits()
    else:
        grid = GridLimits(buy_max=gr.number("buy_max", 20.0),
                          sell_max=gr.number("sell_max", 10.0))
        gr.finish()

    price = None
    pr = r.child("price")
    if pr is not None:
        price = PriceSignal(mode=pr.text("mode"), values=pr.series("values"))
        pr.finish()

    inflexible = None
    ir = r.child("inflexible")
    if ir is not None:
        inflexible = InflexibleLoads(predictable=ir.series("predictable", 0.0),
                                     unpredictable=ir.series("unpredictable", 0.0))
        ir.finish()

    ess = None
    er = r.child("ess")
    if er is not None:
        ess = EssConfig(capacity_max=er.number("capacity_max"),
                        charge_max=er.number("charge_max"),
                        discharge_max=er.number("discharge_max"),
                        efficiency=er.number("efficiency", 0.95),
                        capacity_min=er.number("capacity_min", 0.0),
                        initial_soc=er.number("initial_soc", None))
        er.finish()

    ev = None
    vr = r.child("ev")
    if vr is not None:
        ev = EvConfig(capacity_max=vr.number("capacity_max"),
                      charge_max=vr.number("charge_max"),
                      discharge_max=vr.number("discharge_max"),
                      return_soc=vr.number("return_soc"),
                      depart_step=vr.integer("depart_step"),
                      return_step=vr.integer("return_step"),
                      efficiency=vr.number("efficiency", 0.95),
                      capacity_min=vr.number("capacity_min", 0.0))
        vr.finish()

    appliances = []
    for ar in r.items("appliances"):
        phases = []
        for ph in ar.items("phases"):
            phases.append(PhaseSpec(power_kw=ph.number("power_kw"),
                                    duration_minutes=ph.integer("duration_minutes")))
            ph.finish()
        appliances.append(AppliancePhaseProgram(
            name=ar.text("name"),
            phases=phases,
            earliest_start=ar.integer("earliest_start"),
            latest_finish=ar.integer("latest_finish"),
            chained_after=ar.text("chained_after", None)))
        ar.finish()

    hvac = None
    cr = r.child("hvac")
    if cr is not None:
        def levels(key):
            value = cr.series(key, [])
            return [value] if isinstance(value, float) else value

        hvac = HvacConfig(t_initial=cr.number("t_initial"),
                          comfort_min=cr.series("comfort_min"),
                          comfort_max=cr.series("comfort_max"),
                          outdoor=cr.series("outdoor"),
                          cool_levels=levels("cool_levels"),
                          heat_levels=levels("heat_levels"),
                          mass_air_kg=cr.number("mass_air_kg", 1778.369),
                          c_thermal=cr.number("c_thermal", 1.01),
                          r_thermal=cr.number("r_thermal", 3.196e-6),
                          eer=cr.number("eer", 3.5),
                          cop=cr.number("cop", 4.0))
        cr.finish()

    pv = None
    sr = r.child("pv")
    if sr is not None:
        pv = PvConfig(efficiency=sr.number("efficiency"),
                      area_m2=sr.number("area_m2"),
                      irradiance=sr.series("irradiance"))
        sr.finish()

    spec = HouseholdSpec(horizon=horizon, grid=grid, price=price,
                         inflexible=inflexible, ess=ess, ev=ev,
                         appliances=appliances, hvac=hvac, pv=pv,
                         sell_price_multiplier=r.number("sell_price_multiplier", 1.0))
    r.seen.add("run")
    r.finish()
    spec.validate(require_price=False)
    return spec


def parse_run(obj: dict, base_dir: Path, defaults: list) -> RunConfig:
    """Parse the run block; resolves and checks referenced paths."""
    r = _Reader(obj, "run", defaults)
    prices = {}
    for tariff, rel in r.mapping("prices").items():
        if tariff not in ("TOU", "RTP"):
            raise ConfigError(f"run.prices.{tariff}", "tariff must be 'TOU' or 'RTP'")
        if not isinstance(rel, str):
            raise ConfigError(f"run.prices.{tariff}", "expected a file path string")
        path = (base_dir / rel).resolve()
        if not path.is_file():
            raise ConfigError(f"run.prices.{tariff}", f"file not found: {path}")
        prices[tariff] = str(path)
    history_dir = r.text("history_dir", None)
    if history_dir is not None:
        resolved = (base_dir / history_dir).resolve()
        if not resolved.is_dir():
            raise ConfigError("run.history_dir", f"directory not found: {resolved}")
        history_dir = str(resolved)
    scenarios = r.obj.get("scenarios", ["base", "s1_max_avg", "s1_median_avg", "s2_predictive"])
    r.seen.add("scenarios")
    if not isinstance(scenarios, list) or not all(isinstance(s, str) for s in scenarios):
        raise ConfigError("run.scenarios", "expected a list of scenario ids")
    solver = None
    so = r.child("solver")
    if so is not None:
        solver = SolveOptions(
            relative_mip_gap=so.number("relative_mip_gap", 0.02),
            max_nodes=so.integer("max_nodes", 8),
            feasibility_tol=so.number("feasibility_tol", 1e-7),
            integrality_tol=so.number("integrality_tol", 1e-6))
        so.finish()
    starts = {}
    for name, value in r.mapping("appliance_starts").items():
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"run.appliance_starts.{name}", "expected an integer step")
        starts[name] = value
    run = RunConfig(price_files=prices,
                    history_dir=history_dir,
                    scenarios=scenarios,
                    out_dir=r.text("out_dir", "out"),
                    seed=r.integer("seed", 0),
                    solver=solver,
                    appliance_starts=starts,
                    forecast_window=r.integer("forecast_window", 5),
                    applied_defaults=defaults)
    r.finish()
    return run


def load_config(path) -> tuple[HouseholdSpec, RunConfig]:
    """Read, parse, and validate one JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path),
                          f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(str(path), "top level must be an object")
    defaults: list = []
    spec = parse_household(obj, defaults)
    run = parse_run(obj.get("run", {}), path.parent, defaults)
    return spec, run
