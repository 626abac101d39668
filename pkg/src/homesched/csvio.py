"""CSV ingestion and emission: prices, load history, schedules, reports.

All floats are rendered with 17 significant digits so every file
round-trips to the exact in-memory value.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import InputError
from .household import Horizon, PriceSignal
from .plan import SchedulePlan
from .prep import INTERPOLATED, OBSERVED, TimeSeries, parse_clock

_MINUTE = np.timedelta64(1, "m")


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc}") from exc
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise InputError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    return header, [[c.strip() for c in row] for row in rows[1:]]


def _parse_float(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise InputError(f"{where}: not a number: {token!r}") from exc


def load_price_csv(path, horizon: Horizon, mode: str | None = None) -> PriceSignal:
    """Read a tariff file.

    Two layouts are accepted: piecewise blocks ``start,end,price_usd_per_kwh``
    with HH:MM bounds (expanded per step; defaults to TOU), and per-step rows
    ``step,price_usd_per_kwh`` (defaults to RTP).
    """
    header, rows = _read_rows(path)
    name = Path(path).name
    if header[:2] == ["start", "end"]:
        return _load_price_blocks(name, rows, horizon, mode or "TOU")
    if header[0] in ("step", "time"):
        return _load_price_steps(name, header[0], rows, horizon, mode or "RTP")
    raise InputError(f"{name}: unrecognized price header {header!r}; expected "
                     "start,end,price_usd_per_kwh or step,price_usd_per_kwh")


def _load_price_blocks(name, rows, horizon, mode) -> PriceSignal:
    step = horizon.step_minutes
    values = np.full(horizon.steps, np.nan)
    blocks = []
    for i, row in enumerate(rows):
        if len(row) != 3:
            raise InputError(f"{name}: row {i + 2}: expected start,end,price")
        start = parse_clock(row[0]) if row[0] != "24:00" else 1440
        end = parse_clock(row[1]) if row[1] != "24:00" else 1440
        price = _parse_float(row[2], f"{name}: row {i + 2}")
        if price < 0:
            raise InputError(f"{name}: row {i + 2}: negative price {price}")
        if end <= start:
            raise InputError(f"{name}: row {i + 2}: block {row[0]}-{row[1]} is empty")
        if start % step or end % step:
            raise InputError(f"{name}: row {i + 2}: block {row[0]}-{row[1]} "
                             f"does not align with the {step}-minute step grid")
        blocks.append((start, end, price, row[0], row[1]))
    for start, end, price, s_txt, e_txt in blocks:
        lo, hi = start // step, end // step
        taken = ~np.isnan(values[lo:hi])
        if taken.any():
            at = lo + int(np.argmax(taken))
            raise InputError(f"{name}: block {s_txt}-{e_txt} overlaps an earlier "
                             f"block at step {at}")
        values[lo:hi] = price
    missing = np.isnan(values)
    if missing.any():
        at = int(np.argmax(missing))
        raise InputError(f"{name}: no price covers step {at} "
                         f"({at * step // 60:02d}:{at * step % 60:02d})")
    return PriceSignal(mode=mode, values=values)


def _load_price_steps(name, key, rows, horizon, mode) -> PriceSignal:
    if len(rows) != horizon.steps:
        raise InputError(f"{name}: {len(rows)} price rows for a horizon of "
                         f"{horizon.steps} steps")
    values = np.zeros(horizon.steps)
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise InputError(f"{name}: row {i + 2}: expected {key},price")
        if key == "step":
            try:
                idx = int(row[0])
            except ValueError as exc:
                raise InputError(f"{name}: row {i + 2}: bad step index {row[0]!r}") from exc
        else:
            idx = parse_clock(row[0]) // horizon.step_minutes
        if idx != i:
            raise InputError(f"{name}: row {i + 2}: steps out of order "
                             f"(expected {i}, found {idx})")
        price = _parse_float(row[1], f"{name}: row {i + 2}")
        if price < 0:
            raise InputError(f"{name}: row {i + 2}: negative price {price}")
        values[i] = price
    return PriceSignal(mode=mode, values=values)


def write_price_csv(path, price: PriceSignal, horizon: Horizon):
    """Per-step tariff emission (the canonical round-trippable layout)."""
    lines = ["step,price_usd_per_kwh"]
    for i, value in enumerate(np.asarray(price.values, dtype=float)):
        lines.append(f"{i},{_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_history_csv(directory) -> dict[str, TimeSeries]:
    """One series per ``<name>.csv`` file with columns timestamp_iso8601,kw.

    Timestamps must be strictly increasing and uniformly spaced; missing
    rows whose gap is a whole number of steps become interpolated,
    quality-flagged points.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory}: not a directory")
    out: dict[str, TimeSeries] = {}
    for path in sorted(directory.glob("*.csv")):
        out[path.stem] = load_history_file(path)
    if not out:
        raise InputError(f"{directory}: no .csv history files found")
    return out


def load_history_file(path) -> TimeSeries:
    header, rows = _read_rows(path)
    name = Path(path).name
    if header != ["timestamp_iso8601", "kw"]:
        raise InputError(f"{name}: expected header timestamp_iso8601,kw, got {header!r}")
    if not rows:
        raise InputError(f"{name}: no data rows")
    stamps = []
    values = []
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise InputError(f"{name}: row {i + 2}: expected timestamp,kw")
        try:
            stamps.append(np.datetime64(row[0], "m"))
        except ValueError as exc:
            raise InputError(f"{name}: row {i + 2}: bad timestamp {row[0]!r}") from exc
        values.append(_parse_float(row[1], f"{name}: row {i + 2}"))
    stamps = np.array(stamps)
    diffs = np.diff(stamps) / _MINUTE
    if len(diffs) == 0:
        return TimeSeries(start=stamps[0], step_minutes=1, values=np.array(values))
    if (diffs <= 0).any():
        at = int(np.argmax(diffs <= 0))
        raise InputError(f"{name}: timestamps not strictly increasing at row {at + 3}")
    step = int(diffs.min())
    if (diffs % step != 0).any():
        at = int(np.argmax(diffs % step != 0))
        raise InputError(f"{name}: mixed step sizes: {int(diffs[at])} minutes at "
                         f"row {at + 3} versus {step} minutes elsewhere")
    total = int((stamps[-1] - stamps[0]) / _MINUTE) // step + 1
    full = np.full(total, np.nan)
    quality = np.full(total, INTERPOLATED, dtype=np.uint8)
    idx = ((stamps - stamps[0]) / _MINUTE).astype(int) // step
    full[idx] = values
    quality[idx] = OBSERVED
    gaps = np.isnan(full)
    if gaps.any():
        grid = np.arange(total, dtype=float)
        full[gaps] = np.interp(grid[gaps], grid[~gaps], full[~gaps])
    return TimeSeries(start=stamps[0], step_minutes=step, values=full, quality=quality)


def write_history_csv(path, series: TimeSeries):
    lines = ["timestamp_iso8601,kw"]
    for stamp, value in zip(series.timestamps(), series.values):
        lines.append(f"{np.datetime_as_string(stamp, unit='m')},{_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def schedule_columns(plan: SchedulePlan) -> dict[str, np.ndarray]:
    """Named per-step traces of a plan, in a stable column order."""
    cols: dict[str, np.ndarray] = {
        "grid_buy_kw": plan.grid_buy,
        "grid_sell_kw": plan.grid_sell,
        "inflexible_kw": plan.inflexible,
        "pv_available_kw": plan.pv_available,
        "pv_use_kw": plan.pv_use,
        "pv_sell_kw": plan.pv_sell,
        "pv_spill_kw": plan.pv_spill,
        "ess_charge_kw": plan.ess_charge,
        "ess_discharge_kw": plan.ess_discharge,
        "ess_to_house_kw": plan.ess_to_house,
        "ess_to_grid_kw": plan.ess_to_grid,
        "ev_charge_kw": plan.ev_charge,
        "ev_discharge_kw": plan.ev_discharge,
        "ev_to_house_kw": plan.ev_to_house,
        "ev_to_grid_kw": plan.ev_to_grid,
        "hvac_cool_kw": plan.hvac_cool_kw,
        "hvac_heat_kw": plan.hvac_heat_kw,
    }
    if plan.ess_soc is not None:
        cols["ess_soc_start_kwh"] = plan.ess_soc[:-1]
    if plan.ev_soc is not None:
        cols["ev_soc_start_kwh"] = plan.ev_soc[:-1]
    if plan.indoor_temp is not None:
        cols["indoor_temp_f"] = plan.indoor_temp
    for name in sorted(plan.appliance_power):
        cols[f"appliance_{name}_kw"] = plan.appliance_power[name]
    return cols


def write_schedule_csv(path, plan: SchedulePlan):
    cols = schedule_columns(plan)
    lines = ["step," + ",".join(cols)]
    for t in range(plan.steps):
        lines.append(str(t) + "," + ",".join(_fmt(v[t]) for v in cols.values()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_schedule_csv(path) -> dict[str, np.ndarray]:
    """Re-ingest a schedule file into named columns (step column checked)."""
    header, rows = _read_rows(path)
    if not header or header[0] != "step":
        raise InputError(f"{Path(path).name}: first column must be 'step'")
    data = {name: np.zeros(len(rows)) for name in header[1:]}
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise InputError(f"{Path(path).name}: row {i + 2}: "
                             f"{len(row)} cells for {len(header)} columns")
        if int(row[0]) != i:
            raise InputError(f"{Path(path).name}: row {i + 2}: steps out of order")
        for name, cell in zip(header[1:], row[1:]):
            data[name][i] = _parse_float(cell, f"{Path(path).name}: row {i + 2}")
    return data


def _report_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return _fmt(value)
    return str(value)


def write_report_csv(path, report):
    """Summary and delta rows in one file, distinguished by the record column."""
    fields = ["record", "scenario", "tariff", "average_kw", "peak_kw", "sd_kw",
              "par", "cost_usd", "status", "gap", "series_source",
              "par_pct", "sd_pct", "cost_pct", "note"]
    lines = [",".join(fields)]
    for row in report.summary_rows():
        row = {"record": "summary", **row}
        lines.append(",".join(_report_cell(row.get(f)) for f in fields))
    for row in report.delta_rows():
        row = {"record": "delta", **row}
        lines.append(",".join(_report_cell(row.get(f)) for f in fields))
    Path(path).write_text("\n".join(lines) + "\n")


def emit_outputs(report, outdir, prices: dict[str, PriceSignal] | None = None,
                 horizon: Horizon | None = None,
                 model_dump: str | None = None) -> list[Path]:
    """Write schedules, reports, and plot data for one comparison run.

    The base schedule is tariff-independent (prices enter only the report),
    so it is written once; managed schedules get one file per tariff.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "plotdata").mkdir(exist_ok=True)
    except OSError as exc:
        raise InputError(f"{outdir}: cannot create output directory: {exc}") from exc
    written: list[Path] = []
    base_written = False
    for entry in report.entries:
        if entry.plan is None:
            continue
        if entry.scenario_id == "base":
            if base_written:
                continue
            target = outdir / "schedule_base.csv"
            base_written = True
        else:
            target = outdir / f"schedule_{entry.scenario_id}_{entry.tariff}.csv"
        write_schedule_csv(target, entry.plan)
        written.append(target)
        if entry.net is not None:
            net_path = outdir / "plotdata" / f"net_{entry.scenario_id}_{entry.tariff}.csv"
            lines = ["step,net_kw"]
            for t, v in enumerate(entry.net.values):
                lines.append(f"{t},{_fmt(v)}")
            net_path.write_text("\n".join(lines) + "\n")
    report_csv = outdir / "report.csv"
    write_report_csv(report_csv, report)
    written.append(report_csv)
    report_txt = outdir / "report.txt"
    report_txt.write_text(report.render_text())
    written.append(report_txt)
    if prices and horizon is not None:
        for tariff, signal in prices.items():
            write_price_csv(outdir / "plotdata" / f"prices_{tariff}.csv", signal, horizon)
    if model_dump is not None:
        (outdir / "model_dump.txt").write_text(model_dump)
        written.append(outdir / "model_dump.txt")
    return written
