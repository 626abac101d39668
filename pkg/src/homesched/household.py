"""Declarative description of one household's schedulable day.

Every knob of the scheduling problem lives here: the time axis, tariff,
grid limits, storage, electric vehicle, phased appliances, HVAC, PV, and
the non-controllable loads.  Validation reports the dotted path of the
offending field so config errors point at the exact key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .prep import parse_clock

TOU = "TOU"
RTP = "RTP"

ALLOWED_STEPS = (1, 5, 15, 60)


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(path, message)


def _as_step_array(value, steps: int, path: str) -> np.ndarray:
    """Accept a scalar or a length-``steps`` sequence; return a float array."""
    if np.isscalar(value):
        arr = np.full(steps, float(value))
    else:
        arr = np.asarray(value, dtype=float)
        _require(arr.ndim == 1, path, "must be a scalar or a flat list")
        _require(len(arr) == steps, path, f"needs exactly {steps} entries, got {len(arr)}")
    _require(bool(np.all(np.isfinite(arr))), path, "contains non-finite entries")
    return arr


@dataclass
class Horizon:
    """The scheduling day: a whole number of equal steps covering 24 hours."""

    steps: int
    step_minutes: int
    start_of_day: str = "00:00"

    def validate(self, path: str = "horizon"):
        _require(self.step_minutes in ALLOWED_STEPS, f"{path}.step_minutes",
                 f"must be one of {ALLOWED_STEPS}")
        _require(self.steps > 0, f"{path}.steps", "must be positive")
        _require(self.steps * self.step_minutes == 1440, f"{path}.steps",
                 f"steps * step_minutes must equal 1440, got {self.steps * self.step_minutes}")
        parse_clock(self.start_of_day)

    @property
    def dt_hours(self) -> float:
        return self.step_minutes / 60.0


@dataclass
class PriceSignal:
    """Per-step energy price in $/kWh under a named tariff mode."""

    mode: str
    values: np.ndarray

    def validate(self, horizon: Horizon, path: str = "price"):
        _require(self.mode in (TOU, RTP), f"{path}.mode", "must be 'TOU' or 'RTP'")
        self.values = _as_step_array(self.values, horizon.steps, f"{path}.values")
        _require(bool(np.all(self.values >= 0.0)), f"{path}.values",
                 "prices must be non-negative")


@dataclass
class GridLimits:
    """Point-of-connection limits in kW; zero disables that direction."""

    buy_max: float = 20.0
    sell_max: float = 10.0

    def validate(self, path: str = "grid"):
        _require(self.buy_max >= 0.0, f"{path}.buy_max", "must be >= 0")
        _require(self.sell_max >= 0.0, f"{path}.sell_max", "must be >= 0")


@dataclass
class EssConfig:
    """Stationary battery: energy window, power limits, one-way efficiency."""

    capacity_max: float
    charge_max: float
    discharge_max: float
    efficiency: float = 0.95
    capacity_min: float = 0.0
    initial_soc: float | None = None  # defaults to capacity_max (full at midnight)

    def validate(self, path: str = "ess"):
        _require(self.capacity_max > 0.0, f"{path}.capacity_max", "must be > 0")
        _require(0.0 <= self.capacity_min <= self.capacity_max, f"{path}.capacity_min",
                 "must satisfy 0 <= capacity_min <= capacity_max")
        if self.initial_soc is None:
            self.initial_soc = self.capacity_max
        _require(self.capacity_min <= self.initial_soc <= self.capacity_max,
                 f"{path}.initial_soc", "must lie within the capacity window")
        _require(self.charge_max > 0.0, f"{path}.charge_max", "must be > 0")
        _require(self.discharge_max > 0.0, f"{path}.discharge_max", "must be > 0")
        _require(0.0 < self.efficiency <= 1.0, f"{path}.efficiency", "must be in (0, 1]")


@dataclass
class EvConfig:
    """Electric vehicle: storage plus presence windows.

    The car is home during steps [0, depart_step) and [return_step, steps).
    It starts the day full, must be full at departure, arrives with
    ``return_soc``, and must be full again by the end of the horizon.
    """

    capacity_max: float
    charge_max: float
    discharge_max: float
    return_soc: float
    depart_step: int
    return_step: int
    efficiency: float = 0.95
    capacity_min: float = 0.0

    def validate(self, horizon: Horizon, path: str = "ev"):
        _require(self.capacity_max > 0.0, f"{path}.capacity_max", "must be > 0")
        _require(0.0 <= self.capacity_min <= self.capacity_max, f"{path}.capacity_min",
                 "must satisfy 0 <= capacity_min <= capacity_max")
        _require(self.capacity_min <= self.return_soc <= self.capacity_max,
                 f"{path}.return_soc", "must lie within the capacity window")
        _require(self.charge_max > 0.0, f"{path}.charge_max", "must be > 0")
        _require(self.discharge_max > 0.0, f"{path}.discharge_max", "must be > 0")
        _require(0.0 < self.efficiency <= 1.0, f"{path}.efficiency", "must be in (0, 1]")
        _require(0 <= self.depart_step <= horizon.steps, f"{path}.depart_step",
                 f"must lie in [0, {horizon.steps}]")
        _require(0 <= self.return_step <= horizon.steps, f"{path}.return_step",
                 f"must lie in [0, {horizon.steps}]")
        _require(self.depart_step <= self.return_step, f"{path}.return_step",
                 "must not precede depart_step")
        _require(self.depart_step != self.return_step
                 or self.depart_step in (0, horizon.steps), f"{path}.return_step",
                 "zero-length trips inside the day are ambiguous; for an all-day stay "
                 "set depart_step = return_step = steps")


@dataclass
class PhaseSpec:
    """One phase of an appliance program: steady power for a fixed duration."""

    power_kw: float
    duration_minutes: int

    def validate(self, path: str):
        _require(self.power_kw >= 0.0, f"{path}.power_kw", "must be >= 0")
        _require(self.duration_minutes > 0, f"{path}.duration_minutes", "must be > 0")


@dataclass
class AppliancePhaseProgram:
    """A non-interruptible appliance: ordered phases inside a time window.

    Phases run back to back with no pause; the whole program must fit in
    [earliest_start, latest_finish) (steps).  ``chained_after`` names
    another appliance whose last phase must end exactly when this one's
    first phase begins.
    """

    name: str
    phases: list[PhaseSpec]
    earliest_start: int
    latest_finish: int
    chained_after: str | None = None

    def validate(self, horizon: Horizon, path: str = "appliance"):
        _require(bool(self.name), f"{path}.name", "must be non-empty")
        _require(len(self.phases) > 0, f"{path}.phases", "needs at least one phase")
        for i, ph in enumerate(self.phases):
            ph.validate(f"{path}.phases[{i}]")
            _require(ph.duration_minutes % horizon.step_minutes == 0,
                     f"{path}.phases[{i}].duration_minutes",
                     f"must be a multiple of the {horizon.step_minutes}-minute step")
        _require(0 <= self.earliest_start < horizon.steps, f"{path}.earliest_start",
                 f"must lie in [0, {horizon.steps})")
        _require(self.earliest_start < self.latest_finish <= horizon.steps,
                 f"{path}.latest_finish",
                 "must be greater than earliest_start and at most the horizon length")
        total = self.total_steps(horizon)
        window = self.latest_finish - self.earliest_start
        _require(total <= window, f"{path}.latest_finish",
                 f"window of {window} step(s) cannot fit {total} step(s) of phases")

    def duration_steps(self, horizon: Horizon) -> list[int]:
        return [ph.duration_minutes // horizon.step_minutes for ph in self.phases]

    def total_steps(self, horizon: Horizon) -> int:
        return sum(self.duration_steps(horizon))


@dataclass
class HvacConfig:
    """Thermal model of the conditioned space plus discrete HVAC modes.

    The indoor temperature follows a first-order recursion toward the
    outdoor series; cooling modes pull it down, heating modes push it up.
    ``comfort_min``/``comfort_max`` (scalar or per-step) bound every step's
    end-of-step temperature.
    """

    t_initial: float
    comfort_min: object
    comfort_max: object
    outdoor: object
    cool_levels: list[float] = field(default_factory=list)
    heat_levels: list[float] = field(default_factory=list)
    mass_air_kg: float = 1778.369
    c_thermal: float = 1.01          # kJ/(kg*degF)
    r_thermal: float = 3.196e-6      # degF/J
    eer: float = 3.5
    cop: float = 4.0

    def validate(self, horizon: Horizon, path: str = "hvac"):
        steps = horizon.steps
        self.comfort_min = _as_step_array(self.comfort_min, steps, f"{path}.comfort_min")
        self.comfort_max = _as_step_array(self.comfort_max, steps, f"{path}.comfort_max")
        self.outdoor = _as_step_array(self.outdoor, steps, f"{path}.outdoor")
        _require(bool(np.all(self.comfort_min <= self.comfort_max)), f"{path}.comfort_max",
                 "comfort band is empty at some step")
        for label, levels in (("cool_levels", self.cool_levels), ("heat_levels", self.heat_levels)):
            for i, kw in enumerate(levels):
                _require(kw > 0.0, f"{path}.{label}[{i}]", "mode power must be > 0")
        _require(self.mass_air_kg > 0.0, f"{path}.mass_air_kg", "must be > 0")
        _require(self.c_thermal > 0.0, f"{path}.c_thermal", "must be > 0")
        _require(self.r_thermal > 0.0, f"{path}.r_thermal", "must be > 0")
        _require(self.eer > 0.0, f"{path}.eer", "must be > 0")
        _require(self.cop > 0.0, f"{path}.cop", "must be > 0")

    # First-order coefficients; the step length enters in hours, matching
    # the kJ->kWh conversion constant 2.77e-4 in the mode gains.
    def drift_alpha(self, horizon: Horizon) -> float:
        return horizon.dt_hours / (1000.0 * self.mass_air_kg * self.c_thermal * self.r_thermal)

    def cool_gain(self, horizon: Horizon) -> float:
        """Temperature drop per kW of cooling over one step (degF/kW)."""
        return horizon.dt_hours * self.eer / (2.77e-4 * self.mass_air_kg * self.c_thermal)

    def heat_gain(self, horizon: Horizon) -> float:
        return horizon.dt_hours * self.cop / (2.77e-4 * self.mass_air_kg * self.c_thermal)


@dataclass
class PvConfig:
    """Rooftop PV: production is efficiency * area * irradiance, a constant
    per step that must be fully allocated between use, export, and spill."""

    efficiency: float
    area_m2: float
    irradiance: object  # kW/m2 per step

    def validate(self, horizon: Horizon, path: str = "pv"):
        _require(0.0 < self.efficiency <= 1.0, f"{path}.efficiency", "must be in (0, 1]")
        _require(self.area_m2 > 0.0, f"{path}.area_m2", "must be > 0")
        self.irradiance = _as_step_array(self.irradiance, horizon.steps, f"{path}.irradiance")
        _require(bool(np.all(self.irradiance >= 0.0)), f"{path}.irradiance",
                 "irradiance must be non-negative")

    def available_kw(self, horizon: Horizon) -> np.ndarray:
        return self.efficiency * self.area_m2 * np.asarray(self.irradiance, dtype=float)


@dataclass
class InflexibleLoads:
    """Non-controllable demand: a forecastable part and a noise part (kW)."""

    predictable: object
    unpredictable: object = 0.0

    def validate(self, horizon: Horizon, path: str = "inflexible"):
        self.predictable = _as_step_array(self.predictable, horizon.steps,
                                          f"{path}.predictable")
        self.unpredictable = _as_step_array(self.unpredictable, horizon.steps,
                                            f"{path}.unpredictable")
        _require(bool(np.all(self.predictable >= 0.0)), f"{path}.predictable",
                 "loads must be non-negative")
        _require(bool(np.all(self.unpredictable >= 0.0)), f"{path}.unpredictable",
                 "loads must be non-negative")

    def total(self) -> np.ndarray:
        return np.asarray(self.predictable, float) + np.asarray(self.unpredictable, float)


@dataclass
class HouseholdSpec:
    """Everything the model builder needs for one day at one household."""

    horizon: Horizon
    grid: GridLimits = field(default_factory=GridLimits)
    price: PriceSignal | None = None
    inflexible: InflexibleLoads | None = None
    ess: EssConfig | None = None
    ev: EvConfig | None = None
    appliances: list[AppliancePhaseProgram] = field(default_factory=list)
    hvac: HvacConfig | None = None
    pv: PvConfig | None = None
    sell_price_multiplier: float = 1.0

    def validate(self, require_price: bool = True):
        self.horizon.validate()
        self.grid.validate()
        _require(self.sell_price_multiplier >= 0.0, "sell_price_multiplier", "must be >= 0")
        if require_price:
            _require(self.price is not None, "price", "a tariff is required")
        if self.price is not None:
            self.price.validate(self.horizon)
        if self.inflexible is None:
            self.inflexible = InflexibleLoads(predictable=0.0, unpredictable=0.0)
        self.inflexible.validate(self.horizon)
        if self.ess is not None:
            self.ess.validate()
        if self.ev is not None:
            self.ev.validate(self.horizon)
        names = set()
        for i, app in enumerate(self.appliances):
            app.validate(self.horizon, path=f"appliances[{i}]")
            _require(app.name not in names, f"appliances[{i}].name",
                     f"duplicate appliance name {app.name!r}")
            names.add(app.name)
        parent = {a.name: a.chained_after for a in self.appliances}
        for i, app in enumerate(self.appliances):
            if app.chained_after is not None:
                _require(app.chained_after in names, f"appliances[{i}].chained_after",
                         f"references unknown appliance {app.chained_after!r}")
                seen, cur = {app.name}, app.chained_after
                while cur is not None:
                    _require(cur not in seen, f"appliances[{i}].chained_after",
                             "chained appliances form a cycle")
                    seen.add(cur)
                    cur = parent[cur]
        if self.hvac is not None:
            self.hvac.validate(self.horizon)
        if self.pv is not None:
            self.pv.validate(self.horizon)
        return self
