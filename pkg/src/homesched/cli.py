"""Command-line entry points: validate, forecast, schedule, compare, selftest."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .baseplan import base_plan_values
from .builder import build_model
from .config import RunConfig, load_config
from .csvio import (emit_outputs, load_history_csv, load_price_csv,
                    write_price_csv, write_schedule_csv)
from .errors import ConfigError, HomeschedError
from .forecast import (MaxAvgForecaster, MedianAvgForecaster,
                       SeasonalProfileForecaster, evaluate)
from .household import HouseholdSpec, PriceSignal
from .metrics import par, sd
from .milp import SolveOptions, check_solution, solve_milp
from .prep import TimeSeries, day_matrix, fit_scaler, resample_mean
from .scenarios import (DEFAULT_SCENARIO_OPTIONS, SCENARIO_IDS, TARIFFS,
                        BasePlanParams, ScenarioReport, ScenarioSpec, compare,
                        run_scenario)

logger = logging.getLogger("homesched")

_FORECASTERS = {
    "max_avg": MaxAvgForecaster,
    "median_avg": MedianAvgForecaster,
    "predictive": SeasonalProfileForecaster,
}


def _setup_logging():
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    name = os.environ.get("HOMESCHED_LOG_LEVEL", "info").lower()
    logging.basicConfig(stream=sys.stderr,
                        level=levels.get(name, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")


def _combined_history(run: RunConfig) -> TimeSeries:
    """Sum the per-appliance history files into one household load series."""
    sets = load_history_csv(run.history_dir)
    names = sorted(sets)
    first = sets[names[0]]
    total = np.zeros(len(first))
    for name in names:
        series = sets[name]
        if (series.step_minutes != first.step_minutes
                or series.start != first.start or len(series) != len(first)):
            raise HomeschedError(
                f"history file {name}.csv does not align with {names[0]}.csv "
                "(start, step, and length must match)")
        total += series.values
    return TimeSeries(start=first.start, step_minutes=first.step_minutes, values=total)


def _gather_inputs(spec: HouseholdSpec, run: RunConfig):
    """Price signals per tariff and the three scenario load series."""
    prices: dict[str, PriceSignal] = {}
    for tariff, path in run.price_files.items():
        prices[tariff] = load_price_csv(path, spec.horizon, mode=tariff)
    if spec.price is not None and spec.price.mode not in prices:
        prices[spec.price.mode] = spec.price
    if not prices:
        raise ConfigError("run.prices",
                          "no tariff available: list price files or give an inline price block")
    notes = []
    if run.history_dir is not None:
        history = _combined_history(run)
        series = {}
        for key, cls in _FORECASTERS.items():
            model = cls(window=run.forecast_window)
            model.fit(history)
            series[key] = model.predict(spec.horizon)
        notes.append(f"forecast series fitted from {run.history_dir} "
                     f"(window={run.forecast_window})")
    else:
        spec.validate(require_price=False)
        flat = spec.inflexible.total()
        series = {key: flat.copy() for key in _FORECASTERS}
        notes.append("history_dir absent: all scenario series equal the "
                     "configured inflexible load")
    return prices, series, notes


def _solver_options(run: RunConfig, args) -> SolveOptions:
    base = run.solver or DEFAULT_SCENARIO_OPTIONS
    gap = getattr(args, "gap", None)
    nodes = getattr(args, "max_nodes", None)
    return SolveOptions(
        relative_mip_gap=gap if gap is not None else base.relative_mip_gap,
        max_nodes=nodes if nodes is not None else base.max_nodes,
        feasibility_tol=base.feasibility_tol,
        integrality_tol=base.integrality_tol)


def _write_run_log(outdir: Path, run: RunConfig, options: SolveOptions,
                   notes: list[str], lines: list[str]):
    out = [f"seed: {run.seed}",
           f"solver: relative_mip_gap={options.relative_mip_gap} "
           f"max_nodes={options.max_nodes} "
           f"feasibility_tol={options.feasibility_tol} "
           f"integrality_tol={options.integrality_tol}"]
    for path, value in run.applied_defaults:
        out.append(f"default applied: {path} = {value}")
    out += notes
    out += lines
    (outdir / "run.log").write_text("\n".join(out) + "\n")


def cmd_validate(args) -> int:
    spec, run = load_config(args.config)
    prices, series, notes = _gather_inputs(spec, run)
    for note in notes:
        logger.info(note)
    parts = [name for name, present in (
        ("ess", spec.ess), ("ev", spec.ev), ("hvac", spec.hvac), ("pv", spec.pv)
    ) if present is not None]
    print(f"config ok: {spec.horizon.steps} steps x {spec.horizon.step_minutes} min, "
          f"{len(spec.appliances)} appliances, components: {', '.join(parts) or 'none'}, "
          f"tariffs: {', '.join(sorted(prices))}")
    for path, value in run.applied_defaults:
        logger.debug("default applied: %s = %s", path, value)
    return 0


def cmd_forecast(args) -> int:
    spec, run = load_config(args.config)
    if run.history_dir is None:
        raise ConfigError("run.history_dir", "forecasting needs a history directory")
    history = _combined_history(run)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    matrix, _ = day_matrix(history)
    holdout = resample_mean(matrix[-1], history.step_minutes, spec.horizon.step_minutes)
    train = TimeSeries(start=history.start, step_minutes=history.step_minutes,
                       values=history.values[:-matrix.shape[1]])
    lines = []
    for key, cls in _FORECASTERS.items():
        model = cls(window=run.forecast_window)
        model.fit(train)
        predicted = model.predict(spec.horizon)
        mse = evaluate(predicted, holdout)
        path = outdir / f"forecast_{key}.csv"
        rows = ["step,kw"] + [f"{t},{v:.17g}" for t, v in enumerate(predicted)]
        path.write_text("\n".join(rows) + "\n")
        line = f"{key}: wrote {path.name}, holdout mse {mse:.6g}"
        lines.append(line)
        print(line)
    _write_run_log(outdir, run, run.solver or DEFAULT_SCENARIO_OPTIONS, [], lines)
    return 0


def cmd_schedule(args) -> int:
    spec, run = load_config(args.config)
    prices, series, notes = _gather_inputs(spec, run)
    tariff = args.tariff.upper()
    if tariff not in prices:
        raise ConfigError("run.prices", f"tariff {tariff} has no price source")
    if args.scenario not in SCENARIO_IDS:
        raise ConfigError("run.scenarios", f"unknown scenario id {args.scenario!r}")
    options = _solver_options(run, args)
    base_plan = BasePlanParams(appliance_starts=run.appliance_starts or None)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    t0 = time.time()
    if args.scenario != "base":
        entries.append(run_scenario(ScenarioSpec(id="base", tariff=tariff,
                                                 household=spec, series=series,
                                                 prices=prices, base_plan=base_plan),
                                    options))
    entries.append(run_scenario(ScenarioSpec(id=args.scenario, tariff=tariff,
                                             household=spec, series=series,
                                             prices=prices, base_plan=base_plan),
                                options))
    target = entries[-1]
    from .scenarios import DeltaRow, percentage_delta
    deltas = []
    if len(entries) == 2 and entries[0].plan is not None and target.plan is not None:
        deltas.append(DeltaRow(
            scenario_id=target.scenario_id, tariff=tariff,
            par_pct=percentage_delta(target.par, entries[0].par),
            sd_pct=percentage_delta(target.sd, entries[0].sd),
            cost_pct=percentage_delta(target.cost, entries[0].cost)))
    report = ScenarioReport(entries=entries, deltas=deltas)
    emit_outputs(report, outdir, prices={tariff: prices[tariff]}, horizon=spec.horizon)
    lines = [f"{e.scenario_id}/{e.tariff}: status={e.status} cost={e.cost}"
             for e in entries]
    lines.append(f"elapsed: {time.time() - t0:.1f}s")
    _write_run_log(outdir, run, options, notes, lines)
    print(report.render_text())
    return 0


def cmd_compare(args) -> int:
    spec, run = load_config(args.config)
    prices, series, notes = _gather_inputs(spec, run)
    options = _solver_options(run, args)
    tariffs = [t for t in TARIFFS if t in prices]
    scenario_ids = [s for s in SCENARIO_IDS if s in run.scenarios]
    outdir = Path(args.out)
    t0 = time.time()
    report = compare(spec, series, prices,
                     base_plan=BasePlanParams(appliance_starts=run.appliance_starts or None),
                     scenario_ids=scenario_ids, tariffs=tariffs, options=options)
    lines = [f"{e.scenario_id}/{e.tariff}: status={e.status} gap={e.gap:.4g} "
             f"cost={e.cost}" for e in report.entries]
    lines.append(f"elapsed: {time.time() - t0:.1f}s")
    emit_outputs(report, outdir, prices=prices, horizon=spec.horizon)
    _write_run_log(outdir, run, options, notes, lines)
    print(report.render_text())
    return 0


def _selftest_cases():
    """Built-in oracle equivalence checks; yields (name, callable)."""

    def check_metrics():
        assert abs(sd([1.0, 2.0, 3.0, 2.0]) - 0.7071067811865476) < 1e-12
        assert abs(par([1.0, 2.0, 3.0, 2.0]) - 1.5) < 1e-12
        scaler = fit_scaler([1.0, 2.0, 3.0, 4.0, 5.0])
        got = scaler.transform([1.0, 2.0, 3.0, 4.0, 5.0])
        assert np.allclose(got, [-1.0, -0.5, 0.0, 0.5, 1.0])
        return 3

    def check_random_milps():
        from .milp.model import MilpModel
        from .milp.solve import solve_lp

        def brute_force(model):
            binaries = [v.id for v in model.variables if v.kind == "binary"]
            cost = model.objective_vector()
            best = None
            for mask in range(2 ** len(binaries)):
                clone = MilpModel(model.name)
                for v in model.variables:
                    lo, hi = v.lower, v.upper
                    if v.kind == "binary":
                        bit = float((mask >> binaries.index(v.id)) & 1)
                        lo = hi = bit
                    clone.add_variable("continuous", lo, hi, v.name)
                for row in model.constraints:
                    clone.add_constraint(list(row.terms), row.sense, row.rhs, row.tag)
                for vid, coef in enumerate(cost):
                    if coef:
                        clone.set_objective_term(vid, coef)
                res = solve_lp(clone)
                if res.status == "optimal" and (best is None or res.objective < best):
                    best = res.objective
            return best

        rng = np.random.default_rng(20240601)
        cases = 0
        for _ in range(12):
            model = _random_small_milp(rng)
            milp = solve_milp(model, SolveOptions(relative_mip_gap=1e-9))
            expected = brute_force(model)
            if expected is None:
                assert milp.status in ("infeasible", "unbounded"), milp.status
            else:
                assert milp.status == "optimal", milp.status
                assert abs(milp.objective - expected) <= 1e-6 * max(1.0, abs(expected))
            cases += 1
        return cases

    def check_price_roundtrip():
        from .household import Horizon
        hz = Horizon(steps=24, step_minutes=60)
        values = np.round(np.linspace(0.05, 0.4, 24), 6)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "rtp.csv"
            write_price_csv(path, PriceSignal(mode="RTP", values=values), hz)
            back = load_price_csv(path, hz)
            assert np.array_equal(np.asarray(back.values), values)
        return 1

    def check_base_plan():
        from .synth import household_fixture, tou_prices
        spec = household_fixture(steps=24, seed=3)
        spec.price = PriceSignal(mode="TOU", values=tou_prices(24))
        spec.validate()
        build = build_model(spec)
        values = base_plan_values(build)
        report = check_solution(build.model, values, tol=1e-6)
        assert report.ok(1e-6)
        return 1

    yield "metrics_hand_values", check_metrics
    yield "milp_vs_brute_force", check_random_milps
    yield "price_csv_roundtrip", check_price_roundtrip
    yield "base_plan_audit", check_base_plan


def _random_small_milp(rng):
    """Small bounded random MILP with a mix of row senses."""
    from .milp.model import MilpModel
    n_bin = int(rng.integers(2, 5))
    n_cont = int(rng.integers(1, 3))
    model = MilpModel("selftest")
    for b in range(n_bin):
        model.add_binary(f"b{b}")
    for c in range(n_cont):
        model.add_continuous(0.0, float(rng.uniform(1.0, 4.0)), f"x{c}")
    n = n_bin + n_cont
    for vid in range(n):
        model.set_objective_term(vid, float(rng.normal(0.0, 1.0)))
    x0 = np.array([float(rng.integers(0, 2)) for _ in range(n_bin)]
                  + [float(rng.uniform(0.0, 1.0)) for _ in range(n_cont)])
    for _ in range(int(rng.integers(2, 5))):
        cols = rng.choice(n, size=min(n, int(rng.integers(2, 4))), replace=False)
        coefs = rng.normal(0.0, 1.0, len(cols))
        activity = float(coefs @ x0[cols])
        sense = rng.choice(["<=", ">=", "=="])
        slack = float(abs(rng.normal(0.0, 0.5)))
        rhs = activity + slack if sense == "<=" else activity - slack
        if sense == "==":
            rhs = activity
        model.add_constraint([(int(c), float(v)) for c, v in zip(cols, coefs)],
                             sense, rhs)
    return model


def cmd_selftest(args) -> int:
    passed = failed = 0
    for name, fn in _selftest_cases():
        try:
            cases = fn()
            print(f"ok {name} ({cases} cases)")
            passed += cases
        except Exception as exc:  # noqa: BLE001 - report and count any failure
            print(f"FAIL {name}: {exc}")
            failed += 1
    print(f"selftest: {passed} checks passed, {failed} failed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homesched",
        description="Day-ahead household energy scheduling and scenario comparison")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config file and its referenced inputs")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("forecast", help="emit the per-method forecast series")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_forecast)

    p = sub.add_parser("schedule", help="optimize one scenario under one tariff")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scenario", default="s2_predictive",
                   choices=list(SCENARIO_IDS))
    p.add_argument("--tariff", default="TOU",
                   type=str, help="TOU or RTP (case-insensitive)")
    p.add_argument("--max-nodes", type=int, dest="max_nodes")
    p.add_argument("--gap", type=float)
    p.set_defaults(fn=cmd_schedule)

    p = sub.add_parser("compare", help="run all scenarios under all tariffs")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-nodes", type=int, dest="max_nodes")
    p.add_argument("--gap", type=float)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("selftest", help="run the built-in oracle equivalence suite")
    p.set_defaults(fn=cmd_selftest)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except HomeschedError as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {message}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
