"""Turn a household description into a tagged mixed-integer model.

One variable family per device, one constraint tag per physical rule, and
a :class:`VarIndex` that maps every family back to variable ids so plans
can be extracted from (or audited against) a solution vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BuildError
from .household import HouseholdSpec
from .milp import EQ, LE, MilpModel

# Families whose rule is carried by variable bounds rather than rows.
BOUND_TAG_PV = "pv_available"
BOUND_TAG_ESS = "ess_soc_range"
BOUND_TAG_EV = "ev_soc_range"
BOUND_TAG_HVAC = "hvac_comfort_band"


@dataclass
class VarIndex:
    """Variable ids per family; dense families are arrays, sparse are dicts."""

    steps: int
    buy: np.ndarray = None
    sell: np.ndarray = None
    use_buy: np.ndarray = None
    use_sell: np.ndarray = None
    pv_use: np.ndarray | None = None
    pv_sell: np.ndarray | None = None
    pv_spill: np.ndarray | None = None
    ess_charge: np.ndarray | None = None
    ess_discharge: np.ndarray | None = None
    ess_to_house: np.ndarray | None = None
    ess_to_grid: np.ndarray | None = None
    ess_mode: np.ndarray | None = None
    ess_soc: np.ndarray | None = None            # length steps + 1
    ev_charge: dict[int, int] = field(default_factory=dict)
    ev_discharge: dict[int, int] = field(default_factory=dict)
    ev_to_house: dict[int, int] = field(default_factory=dict)
    ev_to_grid: dict[int, int] = field(default_factory=dict)
    ev_mode: dict[int, int] = field(default_factory=dict)
    ev_soc: dict[int, int] = field(default_factory=dict)      # boundary index -> id
    app_run: dict[str, list[dict[int, int]]] = field(default_factory=dict)
    app_done: dict[str, list[dict[int, int]]] = field(default_factory=dict)
    app_power: dict[str, dict[int, int]] = field(default_factory=dict)
    hvac_cool_mode: dict[tuple[int, int], int] = field(default_factory=dict)
    hvac_heat_mode: dict[tuple[int, int], int] = field(default_factory=dict)
    hvac_cool_power: np.ndarray | None = None
    hvac_heat_power: np.ndarray | None = None
    indoor_temp: np.ndarray | None = None

    def ev_home_steps(self) -> list[int]:
        return sorted(self.ev_charge)


@dataclass(frozen=True)
class BuildResult:
    model: MilpModel
    index: VarIndex
    spec: HouseholdSpec
    provenance: frozenset[str]


def _ids(n: int) -> np.ndarray:
    return np.full(n, -1, dtype=np.int64)


class _Builder:
    def __init__(self, spec: HouseholdSpec, name: str):
        spec.validate()
        self.spec = spec
        self.hz = spec.horizon
        self.T = spec.horizon.steps
        self.dt = spec.horizon.dt_hours
        self.m = MilpModel(name)
        self.ix = VarIndex(steps=self.T)
        # Per-step power ledger feeding the balance rows at the end.
        self.supply: list[list[int]] = [[] for _ in range(self.T)]
        self.demand: list[list[int]] = [[] for _ in range(self.T)]
        self.sellers: list[list[int]] = [[] for _ in range(self.T)]
        self.bound_tags: set[str] = set()

    def build(self) -> BuildResult:
        self._grid()
        if self.spec.pv is not None:
            self._pv()
        if self.spec.ess is not None:
            self._ess()
        if self.spec.ev is not None:
            self._ev()
        self._appliances()
        if self.spec.hvac is not None:
            self._hvac()
        self._balance()
        self.m.validate()
        provenance = frozenset(self.m.tag_set() | self.bound_tags)
        return BuildResult(self.m, self.ix, self.spec, provenance)

    def _grid(self):
        g = self.spec.grid
        price = self.spec.price.values
        mult = self.spec.sell_price_multiplier
        ix, m, T = self.ix, self.m, self.T
        ix.buy, ix.sell = _ids(T), _ids(T)
        ix.use_buy, ix.use_sell = _ids(T), _ids(T)
        for t in range(T):
            b = m.add_continuous(0.0, g.buy_max, name=f"buy[{t}]")
            s = m.add_continuous(0.0, g.sell_max, name=f"sell[{t}]")
            ub = m.add_binary(f"use_buy[{t}]")
            us = m.add_binary(f"use_sell[{t}]")
            ix.buy[t], ix.sell[t], ix.use_buy[t], ix.use_sell[t] = b, s, ub, us
            m.set_objective_term(b, price[t] * self.dt)
            m.set_objective_term(s, -mult * price[t] * self.dt)
            m.add_constraint([(b, 1.0), (ub, -g.buy_max)], LE, 0.0, tag="grid_buy_cap")
            m.add_constraint([(s, 1.0), (us, -g.sell_max)], LE, 0.0, tag="grid_sell_cap")
            m.add_constraint([(ub, 1.0), (us, 1.0)], LE, 1.0, tag="grid_excl")
            self.supply[t].append(b)

    def _pv(self):
        avail = self.spec.pv.available_kw(self.hz)
        ix, m = self.ix, self.m
        ix.pv_use, ix.pv_sell, ix.pv_spill = _ids(self.T), _ids(self.T), _ids(self.T)
        self.bound_tags.add(BOUND_TAG_PV)
        for t in range(self.T):
            cap = float(avail[t])
            u = m.add_continuous(0.0, cap, name=f"pv_use[{t}]")
            s = m.add_continuous(0.0, cap, name=f"pv_sell[{t}]")
            w = m.add_continuous(0.0, cap, name=f"pv_spill[{t}]")
            ix.pv_use[t], ix.pv_sell[t], ix.pv_spill[t] = u, s, w
            m.add_constraint([(u, 1.0), (s, 1.0), (w, 1.0)], EQ, cap, tag="pv_split")
            self.supply[t].append(u)
            self.sellers[t].append(s)

    def _ess(self):
        e = self.spec.ess
        eta, dt = e.efficiency, self.dt
        ix, m, T = self.ix, self.m, self.T
        ix.ess_charge, ix.ess_discharge = _ids(T), _ids(T)
        ix.ess_to_house, ix.ess_to_grid, ix.ess_mode = _ids(T), _ids(T), _ids(T)
        ix.ess_soc = _ids(T + 1)
        self.bound_tags.add(BOUND_TAG_ESS)
        for k in range(T + 1):
            ix.ess_soc[k] = m.add_continuous(e.capacity_min, e.capacity_max, name=f"ess_soc[{k}]")
        m.add_constraint([(int(ix.ess_soc[0]), 1.0)], EQ, e.initial_soc, tag="ess_soc_init")
        m.add_constraint([(int(ix.ess_soc[T]), 1.0)], EQ, e.initial_soc, tag="ess_soc_cycle")
        for t in range(T):
            ch = m.add_continuous(0.0, e.charge_max, name=f"ess_ch[{t}]")
            dh = m.add_continuous(0.0, e.discharge_max, name=f"ess_deh[{t}]")
            hs = m.add_continuous(0.0, eta * e.discharge_max, name=f"ess_house[{t}]")
            gr = m.add_continuous(0.0, eta * e.discharge_max, name=f"ess_grid[{t}]")
            u = m.add_binary(f"ess_charging[{t}]")
            ix.ess_charge[t], ix.ess_discharge[t] = ch, dh
            ix.ess_to_house[t], ix.ess_to_grid[t], ix.ess_mode[t] = hs, gr, u
            m.add_constraint([(ch, 1.0), (u, -e.charge_max)], LE, 0.0, tag="ess_charge_cap")
            m.add_constraint([(dh, 1.0), (u, e.discharge_max)], LE, e.discharge_max,
                             tag="ess_discharge_cap")
            m.add_constraint([(dh, eta), (hs, -1.0), (gr, -1.0)], EQ, 0.0,
                             tag="ess_discharge_split")
            m.add_constraint(
                [(int(ix.ess_soc[t + 1]), 1.0), (int(ix.ess_soc[t]), -1.0),
                 (ch, -eta * dt), (dh, dt / eta)],
                EQ, 0.0, tag="ess_soc_step")
            self.demand[t].append(ch)
            self.supply[t].append(hs)
            self.sellers[t].append(gr)

    def _ev(self):
        v = self.spec.ev
        eta, dt = v.efficiency, self.dt
        ix, m, T = self.ix, self.m, self.T
        sessions = []
        if v.depart_step > 0:
            sessions.append((0, v.depart_step))
        if v.return_step < T:
            sessions.append((v.return_step, T))
        if not sessions:
            return
        self.bound_tags.add(BOUND_TAG_EV)
        for lo, hi in sessions:
            for k in range(lo, hi + 1):
                ix.ev_soc[k] = m.add_continuous(v.capacity_min, v.capacity_max, name=f"ev_soc[{k}]")
            for t in range(lo, hi):
                ch = m.add_continuous(0.0, v.charge_max, name=f"ev_ch[{t}]")
                dh = m.add_continuous(0.0, v.discharge_max, name=f"ev_deh[{t}]")
                hs = m.add_continuous(0.0, eta * v.discharge_max, name=f"ev_house[{t}]")
                gr = m.add_continuous(0.0, eta * v.discharge_max, name=f"ev_grid[{t}]")
                u = m.add_binary(f"ev_charging[{t}]")
                ix.ev_charge[t], ix.ev_discharge[t] = ch, dh
                ix.ev_to_house[t], ix.ev_to_grid[t], ix.ev_mode[t] = hs, gr, u
                m.add_constraint([(ch, 1.0), (u, -v.charge_max)], LE, 0.0, tag="ev_charge_cap")
                m.add_constraint([(dh, 1.0), (u, v.discharge_max)], LE, v.discharge_max,
                                 tag="ev_discharge_cap")
                m.add_constraint([(dh, eta), (hs, -1.0), (gr, -1.0)], EQ, 0.0,
                                 tag="ev_discharge_split")
                m.add_constraint(
                    [(ix.ev_soc[t + 1], 1.0), (ix.ev_soc[t], -1.0),
                     (ch, -eta * dt), (dh, dt / eta)],
                    EQ, 0.0, tag="ev_soc_step")
                self.demand[t].append(ch)
                self.supply[t].append(hs)
                self.sellers[t].append(gr)
        if v.depart_step > 0:
            m.add_constraint([(ix.ev_soc[0], 1.0)], EQ, v.capacity_max, tag="ev_start_full")
            m.add_constraint([(ix.ev_soc[v.depart_step], 1.0)], EQ, v.capacity_max,
                             tag="ev_depart_full")
        if v.return_step < T:
            m.add_constraint([(ix.ev_soc[v.return_step], 1.0)], EQ, v.return_soc,
                             tag="ev_return_soc")
            m.add_constraint([(ix.ev_soc[T], 1.0)], EQ, v.capacity_max, tag="ev_full_by_end")

    def _appliances(self):
        apps = {a.name: a for a in self.spec.appliances}
        successors: dict[str, list[str]] = {}
        for a in self.spec.appliances:
            if a.chained_after is not None:
                successors.setdefault(a.chained_after, []).append(a.name)
                self._check_chain_alignment(apps[a.chained_after], a)
        for a in self.spec.appliances:
            self._one_appliance(a, successors.get(a.name, ()), apps)
        for a in self.spec.appliances:
            if a.chained_after is not None:
                self._chain_rows(apps[a.chained_after], a)

    def _check_chain_alignment(self, pred, succ):
        hz = self.hz
        done_lo = pred.earliest_start + pred.total_steps(hz)
        done_hi = pred.latest_finish
        start_lo = succ.earliest_start
        start_hi = succ.latest_finish - succ.total_steps(hz)
        if max(done_lo, start_lo) > min(done_hi, start_hi):
            raise BuildError(
                f"appliance {succ.name!r} can never start exactly when "
                f"{pred.name!r} finishes: finish window [{done_lo}, {done_hi}] "
                f"does not meet start window [{start_lo}, {start_hi}]")

    def _one_appliance(self, a, succ_names, apps):
        m, ix = self.m, self.ix
        es, lf = a.earliest_start, a.latest_finish
        durs = a.duration_steps(self.hz)
        last = len(durs) - 1
        done_end = [lf] * len(durs)
        if succ_names:
            done_end[last] = max([lf] + [apps[s].latest_finish for s in succ_names])
        run = [{t: m.add_binary(f"{a.name}_run{k}[{t}]") for t in range(es, lf)}
               for k in range(len(durs))]
        done = [{t: m.add_binary(f"{a.name}_done{k}[{t}]") for t in range(es, done_end[k])}
                for k in range(len(durs))]
        peak = max(ph.power_kw for ph in a.phases)
        power = {t: m.add_continuous(0.0, peak, name=f"{a.name}_kw[{t}]") for t in range(es, lf)}
        ix.app_run[a.name], ix.app_done[a.name], ix.app_power[a.name] = run, done, power
        for k in range(len(durs)):
            for t in range(es, lf):
                m.add_constraint([(run[k][t], 1.0), (done[k][t], 1.0)], LE, 1.0,
                                 tag="phase_excl")
            for t in range(es + 1, done_end[k]):
                m.add_constraint([(done[k][t - 1], 1.0), (done[k][t], -1.0)], LE, 0.0,
                                 tag="phase_done_monotone")
                terms = [(done[k][t], -1.0)]
                if t - 1 < lf:
                    terms.append((run[k][t - 1], 1.0))
                if t < lf:
                    terms.append((run[k][t], -1.0))
                if t - 1 < lf:  # otherwise nothing can restart anyway
                    m.add_constraint(terms, LE, 0.0, tag="phase_no_restart")
            if k > 0:
                for t in range(es, lf):
                    m.add_constraint([(run[k][t], 1.0), (done[k - 1][t], -1.0)], LE, 0.0,
                                     tag="phase_order")
                    m.add_constraint(
                        [(done[k - 1][t], 1.0), (run[k][t], -1.0), (done[k][t], -1.0)],
                        LE, 0.0, tag="phase_no_gap")
            m.add_constraint([(vid, 1.0) for vid in run[k].values()], EQ, float(durs[k]),
                             tag="phase_duration")
        for t in range(es, lf):
            terms = [(power[t], 1.0)]
            terms += [(run[k][t], -a.phases[k].power_kw) for k in range(len(durs))]
            m.add_constraint(terms, EQ, 0.0, tag="appliance_power")
            self.demand[t].append(power[t])

    def _chain_rows(self, pred, succ):
        m, ix = self.m, self.ix
        p_done = ix.app_done[pred.name][-1]
        s_run = ix.app_run[succ.name][0]
        s_done = ix.app_done[succ.name][0]
        for t in range(succ.earliest_start, succ.latest_finish):
            m.add_constraint([(s_run[t], 1.0), (p_done[t], -1.0)], LE, 0.0, tag="chain_order")
        for t in range(pred.earliest_start, succ.latest_finish):
            terms = [(p_done[t], 1.0)]
            if t in s_run:
                terms.append((s_run[t], -1.0))
            if t in s_done:
                terms.append((s_done[t], -1.0))
            m.add_constraint(terms, LE, 0.0, tag="chain_no_gap")

    def _hvac(self):
        h = self.spec.hvac
        m, ix, T = self.m, self.ix, self.T
        alpha = h.drift_alpha(self.hz)
        gain_cool = h.cool_gain(self.hz)
        gain_heat = h.heat_gain(self.hz)
        self.bound_tags.add(BOUND_TAG_HVAC)
        ix.indoor_temp = _ids(T)
        for t in range(T):
            ix.indoor_temp[t] = m.add_continuous(
                float(h.comfort_min[t]), float(h.comfort_max[t]), name=f"temp[{t}]")
        if h.cool_levels:
            ix.hvac_cool_power = _ids(T)
            for t in range(T):
                pc = m.add_continuous(0.0, max(h.cool_levels), name=f"cool_kw[{t}]")
                ix.hvac_cool_power[t] = pc
                mode = [(m.add_binary(f"cool_mode{dx}[{t}]"), kw)
                        for dx, kw in enumerate(h.cool_levels)]
                for dx, (vid, _) in enumerate(mode):
                    ix.hvac_cool_mode[(dx, t)] = vid
                m.add_constraint([(pc, 1.0)] + [(vid, -kw) for vid, kw in mode], EQ, 0.0,
                                 tag="hvac_cool_power")
                m.add_constraint([(vid, 1.0) for vid, _ in mode], LE, 1.0,
                                 tag="hvac_cool_excl")
                self.demand[t].append(pc)
        if h.heat_levels:
            ix.hvac_heat_power = _ids(T)
            for t in range(T):
                ph = m.add_continuous(0.0, max(h.heat_levels), name=f"heat_kw[{t}]")
                ix.hvac_heat_power[t] = ph
                mode = [(m.add_binary(f"heat_mode{dx}[{t}]"), kw)
                        for dx, kw in enumerate(h.heat_levels)]
                for dx, (vid, _) in enumerate(mode):
                    ix.hvac_heat_mode[(dx, t)] = vid
                m.add_constraint([(ph, 1.0)] + [(vid, -kw) for vid, kw in mode], EQ, 0.0,
                                 tag="hvac_heat_power")
                m.add_constraint([(vid, 1.0) for vid, _ in mode], LE, 1.0,
                                 tag="hvac_heat_excl")
                self.demand[t].append(ph)
        for t in range(T):
            terms = [(int(ix.indoor_temp[t]), 1.0)]
            rhs = alpha * float(h.outdoor[t])
            if t == 0:
                rhs += (1.0 - alpha) * h.t_initial
            else:
                terms.append((int(ix.indoor_temp[t - 1]), -(1.0 - alpha)))
            if h.cool_levels:
                terms.append((int(ix.hvac_cool_power[t]), gain_cool))
            if h.heat_levels:
                terms.append((int(ix.hvac_heat_power[t]), -gain_heat))
            m.add_constraint(terms, EQ, rhs, tag="hvac_temp_step")

    def _balance(self):
        inflex = self.spec.inflexible.total()
        for t in range(self.T):
            terms = [(v, 1.0) for v in self.supply[t]]
            terms += [(v, -1.0) for v in self.demand[t]]
            self.m.add_constraint(terms, EQ, float(inflex[t]), tag="power_balance")
            sell_terms = [(int(self.ix.sell[t]), 1.0)]
            sell_terms += [(v, -1.0) for v in self.sellers[t]]
            self.m.add_constraint(sell_terms, EQ, 0.0, tag="sell_composition")


def build_model(spec: HouseholdSpec, name: str = "household") -> BuildResult:
    """Build the day-ahead scheduling model for one household."""
    return _Builder(spec, name).build()
