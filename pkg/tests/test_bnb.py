"""Branch-and-bound checks: exhaustive-enumeration oracles, pruning
soundness, incumbent monotonicity, limits, and determinism."""

import numpy as np
import pytest

from homesched.milp import (
    GE,
    LE,
    EQ,
    INFEASIBLE,
    NODE_LIMIT,
    OPTIMAL,
    MilpModel,
    SolveOptions,
    check_solution,
    propagate_bounds,
    solve_milp,
)

from oracles import brute_force_milp, random_milp_model

TIGHT = SolveOptions(relative_mip_gap=1e-9)


def knapsack_model(values, weights, capacity):
    m = MilpModel("knapsack")
    ids = [m.add_binary(f"item{i}") for i in range(len(values))]
    m.add_constraint([(i, w) for i, w in zip(ids, weights)], LE, capacity)
    for i, v in zip(ids, values):
        m.set_objective_term(i, -v)  # maximize value
    return m


def test_knapsack_matches_exhaustive_enumeration():
    rng = np.random.default_rng(42)
    for _ in range(6):
        values = np.round(rng.uniform(1, 10, 10), 2)
        weights = np.round(rng.uniform(1, 8, 10), 2)
        capacity = float(np.round(weights.sum() * 0.45, 2))
        model = knapsack_model(values, weights, capacity)
        sol = solve_milp(model, TIGHT)
        ref_status, ref_obj, _ = brute_force_milp(model)
        assert sol.status == OPTIMAL == ref_status
        assert sol.objective == pytest.approx(ref_obj, abs=1e-8)
        assert set(np.round(sol.values).astype(int)) <= {0, 1}


def test_forced_binary_by_constraint():
    m = MilpModel()
    b = m.add_binary("b")
    x = m.add_continuous(0, 4, "x")
    m.add_constraint([(x, 1.0), (b, -4.0)], LE, 0.0)   # x <= 4b
    m.add_constraint([(x, 1.0)], GE, 1.0)              # x >= 1 forces b = 1
    m.set_objective_term(b, 5.0)
    m.set_objective_term(x, 1.0)
    sol = solve_milp(m, TIGHT)
    assert sol.status == OPTIMAL
    assert sol.values[b] == pytest.approx(1.0)
    assert sol.objective == pytest.approx(6.0, abs=1e-9)


def test_continuous_only_model_passes_through():
    m = MilpModel()
    x = m.add_continuous(0, 2)
    m.set_objective_term(x, -1.0)
    sol = solve_milp(m)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-2.0)
    assert sol.nodes_explored == 0


def test_integer_infeasible_but_lp_feasible():
    # LP relaxation feasible at b = 0.5 only.
    m = MilpModel()
    b = m.add_binary("b")
    m.add_constraint([(b, 2.0)], EQ, 1.0)
    sol = solve_milp(m, TIGHT)
    assert sol.status == INFEASIBLE


def test_random_mixed_models_match_enumeration():
    rng = np.random.default_rng(20250816)
    agree = 0
    for _ in range(60):
        model = random_milp_model(rng, n_binary=int(rng.integers(1, 7)))
        sol = solve_milp(model, TIGHT)
        ref_status, ref_obj, _ = brute_force_milp(model)
        assert sol.status == ref_status
        if ref_status == OPTIMAL:
            assert sol.objective == pytest.approx(ref_obj, abs=1e-6)
            rep = check_solution(model, sol.values, tol=1e-6)
            assert rep.max_violation <= 1e-6
            assert rep.max_integrality_violation <= 1e-6
            agree += 1
    assert agree >= 30


def test_incumbent_objective_never_increases():
    rng = np.random.default_rng(7)
    seen_updates = 0
    for _ in range(20):
        model = random_milp_model(rng, n_binary=8, n_cont=3)
        history = []
        solve_milp(model, TIGHT, on_incumbent=lambda obj, x: history.append(obj))
        assert history == sorted(history, reverse=True)
        assert len(set(history)) == len(history)  # strict improvements only
        seen_updates += len(history)
    assert seen_updates > 0


def test_node_limit_reports_honest_status():
    rng = np.random.default_rng(3)
    model = random_milp_model(rng, n_binary=14, n_cont=4)
    sol = solve_milp(model, SolveOptions(max_nodes=2, relative_mip_gap=1e-12))
    if sol.status == NODE_LIMIT:
        assert sol.nodes_explored <= 2
        if sol.values is not None:
            assert sol.gap >= 0.0
    else:
        # Tiny trees may legitimately finish within two nodes.
        assert sol.status in (OPTIMAL, INFEASIBLE)


def test_gap_zero_on_proven_optimum():
    model = knapsack_model([5, 4, 3], [2, 3, 1], 3.0)
    sol = solve_milp(model, TIGHT)
    assert sol.status == OPTIMAL
    assert sol.gap <= 1e-9


def test_bit_identical_reruns():
    rng = np.random.default_rng(11)
    model = random_milp_model(rng, n_binary=9, n_cont=3)
    a = solve_milp(model, TIGHT)
    b = solve_milp(model, TIGHT)
    assert a.status == b.status
    if a.status == OPTIMAL:
        assert a.objective == b.objective
        assert np.array_equal(a.values, b.values)
        assert a.nodes_explored == b.nodes_explored
        assert a.iterations == b.iterations


def test_propagation_tightens_and_detects_infeasible():
    m = MilpModel()
    x = m.add_continuous(0, 10, "x")
    b = m.add_binary("b")
    m.add_constraint([(x, 1.0), (b, 2.0)], LE, 3.0)
    m.add_constraint([(x, 1.0)], GE, 2.0)
    arrays = m.to_arrays()
    lo = arrays.col_lower.copy()
    hi = arrays.col_upper.copy()
    assert propagate_bounds(arrays, lo, hi, 1e-7, 1e-6)
    assert hi[0] <= 3.0 + 1e-6          # x <= 3 from the first row
    assert hi[1] == 0.0                 # b forced off: 2b <= 3 - x <= 1
    lo2 = arrays.col_lower.copy()
    hi2 = arrays.col_upper.copy()
    lo2[0] = 3.5                        # now x >= 3.5 conflicts with row 1
    hi2[1] = 1.0
    lo2[1] = 1.0
    assert not propagate_bounds(arrays, lo2, hi2, 1e-7, 1e-6)


def test_propagation_never_cuts_the_optimum():
    rng = np.random.default_rng(99)
    for _ in range(40):
        model = random_milp_model(rng, n_binary=4, n_cont=3)
        arrays = model.to_arrays()
        lo = arrays.col_lower.copy()
        hi = arrays.col_upper.copy()
        feasible = propagate_bounds(arrays, lo, hi, 1e-7, 1e-6)
        ref_status, ref_obj, _ = brute_force_milp(model)
        if ref_status == OPTIMAL:
            assert feasible, "propagation declared a feasible model infeasible"
            sol = solve_milp(model, TIGHT)
            assert sol.objective == pytest.approx(ref_obj, abs=1e-6)


def test_binaries_with_tight_bounds_prefixed():
    m = MilpModel()
    b = m.add_variable("binary", 1.0, 1.0, "locked")
    x = m.add_continuous(0, 5)
    m.add_constraint([(x, 1.0), (b, 1.0)], LE, 3.0)
    m.set_objective_term(x, -1.0)
    sol = solve_milp(m, TIGHT)
    assert sol.status == OPTIMAL
    assert sol.values[b] == pytest.approx(1.0)
    assert sol.objective == pytest.approx(-2.0, abs=1e-9)
