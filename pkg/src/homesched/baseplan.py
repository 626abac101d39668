"""Reference schedules built without the optimizer.

Two consumers: the "base" scenario, which prices a plausible unmanaged
household (appliances at preferred starts, EV charging on arrival, battery
idle, thermostat HVAC); and the branch-and-bound candidate hook, which
completes a node relaxation into a feasible schedule so the search has an
early incumbent to prune against.
"""

from __future__ import annotations

import numpy as np

from .builder import BuildResult
from .errors import ModelError
from .milp import check_solution

_TOL = 1e-9


def thermostat_trace(spec):
    """Greedy minimum-power mode sequence that stays inside the comfort band.

    Returns (cool_mode, heat_mode, cool_kw, heat_kw, temp) arrays, modes -1
    when off, or None when no single mode keeps some step inside the band.
    """
    h = spec.hvac
    hz = spec.horizon
    T = hz.steps
    alpha = h.drift_alpha(hz)
    gc, gh = h.cool_gain(hz), h.heat_gain(hz)
    choices = [(0.0, -1, -1)]
    choices += [(kw, i, -1) for i, kw in enumerate(h.cool_levels)]
    choices += [(kw, -1, i) for i, kw in enumerate(h.heat_levels)]
    choices.sort(key=lambda c: (c[0], c[1], c[2]))
    cool_mode = np.full(T, -1, dtype=np.int64)
    heat_mode = np.full(T, -1, dtype=np.int64)
    cool_kw = np.zeros(T)
    heat_kw = np.zeros(T)
    temp = np.zeros(T)
    t_now = h.t_initial
    for t in range(T):
        drift = (1.0 - alpha) * t_now + alpha * float(h.outdoor[t])
        found = False
        for kw, ci, hi in choices:
            t_next = drift - gc * kw if hi < 0 else drift + gh * kw
            if h.comfort_min[t] - _TOL <= t_next <= h.comfort_max[t] + _TOL:
                cool_mode[t], heat_mode[t] = ci, hi
                if ci >= 0:
                    cool_kw[t] = kw
                if hi >= 0:
                    heat_kw[t] = kw
                temp[t] = t_next
                t_now = t_next
                found = True
                break
        if not found:
            return None
    return cool_mode, heat_mode, cool_kw, heat_kw, temp


def earliest_chain_starts(spec) -> dict[str, int]:
    """Earliest feasible start per appliance, chains aligned exactly."""
    hz = spec.horizon
    apps = {a.name: a for a in spec.appliances}
    starts: dict[str, int] = {}
    for a in spec.appliances:
        if a.chained_after is None:
            starts[a.name] = a.earliest_start
    changed = True
    while changed:
        changed = False
        for a in spec.appliances:
            if a.chained_after is None or a.name in starts:
                continue
            pred = apps[a.chained_after]
            if pred.name not in starts:
                continue
            # Push the predecessor late enough that this one's window is open.
            done = starts[pred.name] + pred.total_steps(hz)
            if done < a.earliest_start:
                starts[pred.name] = a.earliest_start - pred.total_steps(hz)
                done = a.earliest_start
            starts[a.name] = done
            changed = True
    return starts


def cheapest_chain_starts(spec) -> dict[str, int]:
    """Placement minimizing priced energy, enumerated over the windows."""
    hz = spec.horizon
    price = np.asarray(spec.price.values, dtype=float)
    dt = hz.dt_hours
    apps = {a.name: a for a in spec.appliances}
    children: dict[str, list] = {}
    for a in spec.appliances:
        if a.chained_after is not None:
            children.setdefault(a.chained_after, []).append(a)

    def run_cost(app, start):
        cost, t = 0.0, start
        for ph in app.phases:
            steps = ph.duration_minutes // hz.step_minutes
            cost += ph.power_kw * dt * float(price[t:t + steps].sum())
            t += steps
        return cost

    starts: dict[str, int] = {}
    for a in spec.appliances:
        if a.chained_after is not None:
            continue
        chain = [a]
        cur = a
        while children.get(cur.name):
            cur = children[cur.name][0]
            chain.append(cur)
        best = None
        total0 = chain[0].total_steps(hz)
        for s in range(a.earliest_start, a.latest_finish - total0 + 1):
            pos, cost, ok = s, 0.0, True
            plan = {}
            for app in chain:
                total = app.total_steps(hz)
                if pos < app.earliest_start or pos + total > app.latest_finish:
                    ok = False
                    break
                plan[app.name] = pos
                cost += run_cost(app, pos)
                pos += total
            if ok and (best is None or cost < best[0] - _TOL):
                best = (cost, plan)
        if best is None:
            return earliest_chain_starts(spec)
        starts.update(best[1])
        # An appliance with several dependents: the enumeration above follows
        # only the first chain; place remaining dependents right after.
        for app in chain:
            for extra in children.get(app.name, [])[1:]:
                starts[extra.name] = starts[app.name] + app.total_steps(hz)
    return starts


def _write_appliances(build: BuildResult, y: np.ndarray, starts: dict[str, int]):
    spec, ix, hz = build.spec, build.index, build.spec.horizon
    for a in spec.appliances:
        start = starts[a.name]
        durs = a.duration_steps(hz)
        run, done = ix.app_run[a.name], ix.app_done[a.name]
        power = ix.app_power[a.name]
        t = start
        for k, d in enumerate(durs):
            for s in range(t, t + d):
                y[run[k][s]] = 1.0
                y[power[s]] += a.phases[k].power_kw
            finish = t + d
            for s, vid in done[k].items():
                y[vid] = 1.0 if s >= finish else 0.0
            t = finish


def _write_hvac(build: BuildResult, y: np.ndarray, trace):
    ix = build.index
    cool_mode, heat_mode, cool_kw, heat_kw, temp = trace
    T = ix.steps
    if ix.indoor_temp is not None:
        y[np.asarray(ix.indoor_temp)] = temp
    for t in range(T):
        if ix.hvac_cool_power is not None:
            y[ix.hvac_cool_power[t]] = cool_kw[t]
            if cool_mode[t] >= 0:
                y[ix.hvac_cool_mode[(int(cool_mode[t]), t)]] = 1.0
        if ix.hvac_heat_power is not None:
            y[ix.hvac_heat_power[t]] = heat_kw[t]
            if heat_mode[t] >= 0:
                y[ix.hvac_heat_mode[(int(heat_mode[t]), t)]] = 1.0


def _balance_grid(build: BuildResult, y: np.ndarray) -> bool:
    """Fill buy/sell/PV-split per step from the device values already in y.

    Storage-to-grid flows may be redirected to the house (and house flows to
    the grid) when that is the only way to balance; returns False when no
    consistent assignment exists.
    """
    spec, ix = build.spec, build.index
    T = ix.steps
    avail = (spec.pv.available_kw(spec.horizon) if spec.pv is not None
             else np.zeros(T))
    inflex = spec.inflexible.total()
    sell_cap = spec.grid.sell_max
    buy_cap = spec.grid.buy_max
    for t in range(T):
        demand = float(inflex[t])
        for power in ix.app_power.values():
            if t in power:
                demand += y[power[t]]
        if ix.hvac_cool_power is not None:
            demand += y[ix.hvac_cool_power[t]]
        if ix.hvac_heat_power is not None:
            demand += y[ix.hvac_heat_power[t]]
        if ix.ess_charge is not None:
            demand += y[ix.ess_charge[t]]
        if t in ix.ev_charge:
            demand += y[ix.ev_charge[t]]

        house_ids = []
        grid_ids = []
        if ix.ess_to_house is not None:
            house_ids.append(int(ix.ess_to_house[t]))
            grid_ids.append(int(ix.ess_to_grid[t]))
        if t in ix.ev_to_house:
            house_ids.append(ix.ev_to_house[t])
            grid_ids.append(ix.ev_to_grid[t])
        house = sum(y[i] for i in house_ids)
        grid = sum(y[i] for i in grid_ids)

        residual = demand - house
        if residual < -_TOL:
            # House over-supplied by storage: push the excess to the grid.
            excess = -residual
            if grid + excess > sell_cap + _TOL:
                return False
            for i, g in zip(house_ids, grid_ids):
                move = min(excess, y[i])
                y[i] -= move
                y[g] += move
                excess -= move
                if excess <= _TOL:
                    break
            grid = sum(y[i] for i in grid_ids)
            residual = 0.0
        residual = max(residual, 0.0)

        pv_use = min(float(avail[t]), residual)
        residual -= pv_use
        if residual > _TOL and grid > _TOL:
            # Buying while exporting storage is forbidden; redirect home.
            for g, i in zip(grid_ids, house_ids):
                move = min(residual, y[g])
                y[g] -= move
                y[i] += move
                residual -= move
                if residual <= _TOL:
                    break
            grid = sum(y[i] for i in grid_ids)
        buy = max(residual, 0.0)
        if buy > buy_cap + _TOL:
            return False

        leftover = float(avail[t]) - pv_use
        pv_sell = 0.0
        if buy <= _TOL:
            pv_sell = min(leftover, max(0.0, sell_cap - grid))
        sell = grid + pv_sell
        if sell > sell_cap + _TOL or (buy > _TOL and sell > _TOL):
            return False

        y[ix.buy[t]] = buy
        y[ix.sell[t]] = sell
        y[ix.use_buy[t]] = 1.0 if buy > _TOL else 0.0
        y[ix.use_sell[t]] = 1.0 if sell > _TOL else 0.0
        if ix.pv_use is not None:
            y[ix.pv_use[t]] = pv_use
            y[ix.pv_sell[t]] = pv_sell
            y[ix.pv_spill[t]] = leftover - pv_sell
    return True


def _write_idle_ess(build: BuildResult, y: np.ndarray):
    ix, ess = build.index, build.spec.ess
    if ix.ess_soc is None:
        return
    y[np.asarray(ix.ess_soc)] = ess.initial_soc


def _write_base_ev(build: BuildResult, y: np.ndarray):
    """Charge at full rate from arrival until the battery is full."""
    spec, ix = build.spec, build.index
    v = spec.ev
    if v is None or not ix.ev_soc:
        return
    dt = spec.horizon.dt_hours
    T = ix.steps
    for k in range(0, v.depart_step + 1):
        if k in ix.ev_soc:
            y[ix.ev_soc[k]] = v.capacity_max
    soc = v.return_soc
    for t in range(v.return_step, T):
        y[ix.ev_soc[t]] = soc
        need = max(0.0, (v.capacity_max - soc) / (v.efficiency * dt))
        charge = min(v.charge_max, need)
        y[ix.ev_charge[t]] = charge
        y[ix.ev_mode[t]] = 1.0 if charge > _TOL else 0.0
        soc = soc + v.efficiency * charge * dt
    y[ix.ev_soc[T]] = soc


def base_plan_values(build: BuildResult, starts: dict[str, int] | None = None) -> np.ndarray:
    """Full variable vector for the unmanaged reference schedule."""
    spec, ix = build.spec, build.index
    n = build.model.num_variables
    y = np.zeros(n)
    chosen = dict(earliest_chain_starts(spec))
    if starts:
        chosen.update(starts)
    _write_appliances(build, y, chosen)
    if spec.hvac is not None:
        trace = thermostat_trace(spec)
        if trace is None:
            raise ModelError("no single HVAC mode keeps the comfort band; "
                             "the reference schedule is undefined")
        _write_hvac(build, y, trace)
    _write_idle_ess(build, y)
    _write_base_ev(build, y)
    if not _balance_grid(build, y):
        raise ModelError("the reference schedule cannot be balanced within "
                         "the grid limits")
    report = check_solution(build.model, y, tol=1e-6)
    if not report.ok(1e-6):
        raise ModelError(
            f"reference schedule violates the model: row {report.max_violation:.3e}, "
            f"bound {report.max_bound_violation:.3e}")
    return y


def make_candidate_hook(build: BuildResult, starts: dict[str, int] | None = None):
    """Relaxation-guided completion used as a branch-and-bound incumbent source.

    Appliances go to their cheapest placement and HVAC follows the
    thermostat; storage dispatch is taken from the node relaxation (with
    circular charge/discharge cancelled) and the grid exchange is rebuilt.
    The solver verifies every proposal, so this function may freely fail.
    """
    spec, ix = build.spec, build.index
    n = build.model.num_variables
    app_starts = starts or cheapest_chain_starts(spec)
    trace = thermostat_trace(spec) if spec.hvac is not None else None
    dt = spec.horizon.dt_hours

    static = np.zeros(n)
    _write_appliances(build, static, app_starts)
    if spec.hvac is not None:
        if trace is None:
            return lambda x: None
        _write_hvac(build, static, trace)
    try:
        fallback = base_plan_values(build, starts=app_starts)
    except ModelError:
        fallback = None

    def _storage_from(x, y, charge, discharge, house, grid, mode, eta):
        ids_t = sorted(charge) if isinstance(charge, dict) else range(ix.steps)
        for t in ids_t:
            if isinstance(charge, dict):
                c_id, d_id = charge[t], discharge[t]
                h_id, g_id, m_id = house[t], grid[t], mode[t]
            else:
                c_id, d_id = int(charge[t]), int(discharge[t])
                h_id, g_id, m_id = int(house[t]), int(grid[t]), int(mode[t])
            ch, dh = float(x[c_id]), float(x[d_id])
            hs, gr = float(x[h_id]), float(x[g_id])
            if ch > _TOL and dh > _TOL:
                # Cancel the state-of-charge-neutral circular part.
                gain = eta * dt * ch
                drain = dt / eta * dh
                r = min(gain, drain)
                ch = (gain - r) / (eta * dt)
                new_dh = (drain - r) / (dt / eta)
                scale = new_dh / dh if dh > 0 else 0.0
                hs *= scale
                gr *= scale
                dh = new_dh
            y[c_id], y[d_id], y[h_id], y[g_id] = ch, dh, hs, gr
            y[m_id] = 1.0 if ch > _TOL else 0.0

    def hook(x):
        y = static.copy()
        if ix.ess_charge is not None:
            _storage_from(x, y, ix.ess_charge, ix.ess_discharge,
                          ix.ess_to_house, ix.ess_to_grid, ix.ess_mode,
                          spec.ess.efficiency)
            soc = spec.ess.initial_soc
            eta = spec.ess.efficiency
            y[ix.ess_soc[0]] = soc
            for t in range(ix.steps):
                soc += eta * dt * y[ix.ess_charge[t]] - dt / eta * y[ix.ess_discharge[t]]
                y[ix.ess_soc[t + 1]] = soc
        if ix.ev_charge:
            _storage_from(x, y, ix.ev_charge, ix.ev_discharge,
                          ix.ev_to_house, ix.ev_to_grid, ix.ev_mode,
                          spec.ev.efficiency)
            v, eta = spec.ev, spec.ev.efficiency
            for lo, hi in ((0, v.depart_step), (v.return_step, ix.steps)):
                if lo >= hi:
                    continue
                soc = float(x[ix.ev_soc[lo]])
                y[ix.ev_soc[lo]] = soc
                for t in range(lo, hi):
                    soc += eta * dt * y[ix.ev_charge[t]] - dt / eta * y[ix.ev_discharge[t]]
                    y[ix.ev_soc[t + 1]] = soc
        if not _balance_grid(build, y):
            return fallback
        return y

    return hook
