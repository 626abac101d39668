"""File formats: tariffs, load history, schedules, and the report bundle."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homesched.builder import build_model
from homesched.csvio import (
    load_history_csv,
    load_history_file,
    load_price_csv,
    read_schedule_csv,
    schedule_columns,
    write_history_csv,
    write_price_csv,
    write_schedule_csv,
)
from homesched.errors import InputError
from homesched.household import Horizon, PriceSignal
from homesched.milp import SolveOptions, solve_milp
from homesched.plan import extract_plan
from homesched.prep import INTERPOLATED, OBSERVED, TimeSeries
from homesched.synth import household_fixture, tou_prices

HZ96 = Horizon(steps=96, step_minutes=15)
HZ24 = Horizon(steps=24, step_minutes=60)


# -- price blocks -------------------------------------------------------------

def test_tou_blocks_expand_per_step(tmp_path):
    path = tmp_path / "tou.csv"
    path.write_text(
        "start,end,price_usd_per_kwh\n"
        "00:00,06:00,0.08\n"
        "06:00,17:00,0.15\n"
        "17:00,21:00,0.30\n"
        "21:00,24:00,0.08\n")
    price = load_price_csv(path, HZ96)
    assert price.mode == "TOU"
    assert price.values[0] == 0.08
    assert price.values[6 * 4] == 0.15
    assert price.values[17 * 4] == 0.30
    assert price.values[20 * 4 + 3] == 0.30
    assert price.values[21 * 4] == 0.08
    assert len(price.values) == 96


@pytest.mark.parametrize("body,fragment", [
    ("00:00,06:00,0.08\n05:00,07:00,0.1\n", "overlaps"),
    ("00:00,06:00,0.08\n", "no price covers step 24 (06:00)"),
    ("00:00,06:10,0.08\n", "align"),
    ("06:00,06:00,0.08\n", "empty"),
    ("00:00,06:00,-0.08\n", "negative"),
    ("00:00,06:00\n", "expected start,end,price"),
])
def test_block_tariff_rejects_malformed_files(tmp_path, body, fragment):
    path = tmp_path / "tou.csv"
    path.write_text("start,end,price_usd_per_kwh\n" + body)
    with pytest.raises(InputError, match=fragment.replace("(", "\\(").replace(")", "\\)")):
        load_price_csv(path, HZ96)


# -- per-step prices ----------------------------------------------------------

def test_per_step_prices_round_trip_exactly(tmp_path):
    rng = np.random.default_rng(3)
    price = PriceSignal(mode="RTP", values=rng.uniform(0.01, 0.5, 96))
    path = tmp_path / "rtp.csv"
    write_price_csv(path, price, HZ96)
    back = load_price_csv(path, HZ96)
    assert back.mode == "RTP"
    assert np.array_equal(back.values, price.values)


@given(st.lists(st.floats(min_value=0.0, max_value=10.0,
                          allow_nan=False), min_size=24, max_size=24))
def test_any_finite_price_vector_round_trips(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("prices") / "p.csv"
    price = PriceSignal(mode="RTP", values=np.array(values))
    write_price_csv(path, price, HZ24)
    back = load_price_csv(path, HZ24)
    assert np.array_equal(back.values, price.values)


@pytest.mark.parametrize("rows,fragment", [
    (["1,0.1", "0,0.1"] + [f"{i},0.1" for i in range(2, 24)], "out of order"),
    (["0,0.1"], "1 price rows for a horizon of 24"),
    (["0,0.1", "1,-0.5"] + [f"{i},0.1" for i in range(2, 24)], "negative"),
])
def test_per_step_tariff_rejects_malformed_files(tmp_path, rows, fragment):
    path = tmp_path / "rtp.csv"
    path.write_text("step,price_usd_per_kwh\n" + "\n".join(rows) + "\n")
    with pytest.raises(InputError, match=fragment):
        load_price_csv(path, HZ24)


def test_unknown_header_is_rejected(tmp_path):
    path = tmp_path / "odd.csv"
    path.write_text("price\n0.1\n")
    with pytest.raises(InputError, match="unrecognized price header"):
        load_price_csv(path, HZ24)


# -- load history -------------------------------------------------------------

def history_file(tmp_path, rows, name="load.csv"):
    path = tmp_path / name
    path.write_text("timestamp_iso8601,kw\n" + "\n".join(rows) + "\n")
    return path


def test_two_day_history_round_trips(tmp_path):
    rng = np.random.default_rng(5)
    series = TimeSeries(start=np.datetime64("2024-03-04T00:00", "m"),
                        step_minutes=15, values=rng.uniform(0.0, 3.0, 192))
    path = tmp_path / "house.csv"
    write_history_csv(path, series)
    back = load_history_file(path)
    assert back.step_minutes == 15
    assert back.start == series.start
    assert np.array_equal(back.values, series.values)
    assert np.all(back.quality == OBSERVED)


def test_missing_rows_are_interpolated_and_flagged(tmp_path):
    path = history_file(tmp_path, [
        "2024-03-04T00:00,1.0",
        "2024-03-04T00:15,2.0",
        # 00:30 missing
        "2024-03-04T00:45,4.0",
    ])
    series = load_history_file(path)
    assert len(series.values) == 4
    assert series.values[2] == pytest.approx(3.0)  # linear fill
    assert series.quality[2] == INTERPOLATED
    assert series.quality[1] == OBSERVED


def test_non_monotone_history_is_rejected(tmp_path):
    path = history_file(tmp_path, [
        "2024-03-04T01:00,1.0",
        "2024-03-04T00:45,2.0",
    ])
    with pytest.raises(InputError, match="strictly increasing"):
        load_history_file(path)


def test_mixed_step_sizes_are_rejected(tmp_path):
    path = history_file(tmp_path, [
        "2024-03-04T00:00,1.0",
        "2024-03-04T00:15,2.0",
        "2024-03-04T00:35,3.0",
    ])
    with pytest.raises(InputError, match="mixed step sizes"):
        load_history_file(path)


def test_wrong_header_is_rejected(tmp_path):
    path = tmp_path / "load.csv"
    path.write_text("time,kw\n2024-03-04T00:00,1.0\n")
    with pytest.raises(InputError, match="timestamp_iso8601"):
        load_history_file(path)


def test_history_directory_maps_stem_to_series(tmp_path):
    history_file(tmp_path, ["2024-03-04T00:00,1.0", "2024-03-04T01:00,2.0"],
                 name="fridge.csv")
    history_file(tmp_path, ["2024-03-04T00:00,0.5", "2024-03-04T01:00,0.7"],
                 name="lights.csv")
    series = load_history_csv(tmp_path)
    assert set(series) == {"fridge", "lights"}
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(InputError, match="no .csv history files"):
        load_history_csv(empty)


# -- schedules ----------------------------------------------------------------

@pytest.fixture(scope="module")
def solved_plan():
    from homesched.baseplan import make_candidate_hook

    spec = household_fixture(steps=24, seed=2)
    spec.price = PriceSignal(mode="TOU", values=tou_prices(24))
    build = build_model(spec)
    res = solve_milp(build.model, SolveOptions(relative_mip_gap=0.05, max_nodes=2),
                     candidate_hook=make_candidate_hook(build))
    return extract_plan(build, res)


def test_schedule_round_trips_to_identical_traces(tmp_path, solved_plan):
    path = tmp_path / "schedule.csv"
    write_schedule_csv(path, solved_plan)
    back = read_schedule_csv(path)
    for name, trace in schedule_columns(solved_plan).items():
        # NaN marks the EV's away hours; it must survive the trip too.
        assert np.array_equal(back[name], np.asarray(trace, dtype=float),
                              equal_nan=True), name


def test_schedule_metrics_survive_the_round_trip(tmp_path, solved_plan):
    from homesched.metrics import daily_cost, sd

    path = tmp_path / "schedule.csv"
    write_schedule_csv(path, solved_plan)
    back = read_schedule_csv(path)
    cost = daily_cost(back["grid_buy_kw"], back["grid_sell_kw"],
                      solved_plan.prices, solved_plan.dt_hours,
                      sell_price_multiplier=solved_plan.sell_price_multiplier)
    assert cost == solved_plan.cost()
    assert sd(back["grid_buy_kw"]) == sd(solved_plan.grid_buy)


def test_schedule_reader_checks_the_step_column(tmp_path):
    path = tmp_path / "schedule.csv"
    path.write_text("step,a\n0,1.0\n2,2.0\n")
    with pytest.raises(InputError, match="out of order"):
        read_schedule_csv(path)
    path.write_text("t,a\n0,1.0\n")
    with pytest.raises(InputError, match="first column must be 'step'"):
        read_schedule_csv(path)
