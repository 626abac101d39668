"""Public solve API: LP relaxation and branch-and-bound for binaries.

The search is best-first on the parent relaxation bound with a FIFO
counter as tie-break, branching on the most fractional binary (lowest id
on ties).  Before each node's LP the box is tightened by interval bound
propagation — the only reduction applied — and variables fixed by
branching or propagation are substituted out of the LP the engine sees.
Everything is deterministic: same model, same options, same answer.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalBreakdown
from .model import MilpModel, ModelArrays
from .simplex import CoreResult, minimize_core

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NODE_LIMIT = "node_limit"
TIME_LIMIT = "time_limit"

INF = float("inf")


@dataclass(frozen=True)
class SolveOptions:
    feasibility_tol: float = 1e-7
    integrality_tol: float = 1e-6
    relative_mip_gap: float = 1e-6
    max_nodes: int = 1_000_000
    time_limit_s: float | None = None


@dataclass
class Solution:
    """Outcome of a solve.  ``values`` is indexed by variable id; it is None
    unless the solver has a point to report (optimum or best incumbent)."""

    status: str
    objective: float | None
    values: np.ndarray | None
    gap: float = 0.0
    nodes_explored: int = 0
    iterations: int = 0


def solve_lp(model: MilpModel, options: SolveOptions | None = None) -> Solution:
    """Solve the continuous relaxation (binaries relaxed to their bounds)."""
    options = options or SolveOptions()
    arrays = model.to_arrays()
    res = _box_lp(arrays, arrays.col_lower, arrays.col_upper, options.feasibility_tol)
    return _to_solution(res)


def _to_solution(res: CoreResult) -> Solution:
    if res.status == OPTIMAL:
        return Solution(OPTIMAL, res.objective, res.x, 0.0, 0, res.iterations)
    return Solution(res.status, None, None, INF, 0, res.iterations)


def solve_milp(
    model: MilpModel,
    options: SolveOptions | None = None,
    on_incumbent=None,
    candidate_hook=None,
) -> Solution:
    """Branch-and-bound over the binary variables of ``model``.

    ``on_incumbent(objective, values)`` is called on every incumbent
    improvement; it exists for instrumentation and tests.

    ``candidate_hook(x_relaxation)`` may propose a full-length value vector
    built from a node relaxation (a primal heuristic).  Proposals are
    verified against the model — bounds, rows, integrality — before they
    can become incumbents, so the hook can never corrupt the search.
    """
    options = options or SolveOptions()
    arrays = model.to_arrays()
    binary_ids = np.nonzero(arrays.is_binary)[0]
    if binary_ids.size == 0:
        return solve_lp(model, options)

    started = time.perf_counter()
    feas_tol = options.feasibility_tol
    int_tol = options.integrality_tol

    incumbent_obj = INF
    incumbent_x: np.ndarray | None = None
    nodes = 0
    iterations = 0
    pruned_floor = INF  # lowest bound discarded by the incumbent cutoff
    counter = 0
    # Heap entries: (parent bound, -depth, -counter, branching fixings).
    # Best bound first; among equal bounds prefer the deepest, newest node,
    # so plateaus of cost-equivalent children are dived through instead of
    # being swept breadth-first.
    heap: list[tuple[float, int, int, tuple[tuple[int, float], ...]]] = [(-INF, 0, 0, ())]
    limit_status: str | None = None

    def gap_allow() -> float:
        if not np.isfinite(incumbent_obj):
            return 0.0
        return options.relative_mip_gap * max(1.0, abs(incumbent_obj))

    while heap:
        if options.time_limit_s is not None and time.perf_counter() - started > options.time_limit_s:
            limit_status = TIME_LIMIT
            break
        if nodes >= options.max_nodes:
            limit_status = NODE_LIMIT
            break

        bound, _, _, fixings = heapq.heappop(heap)
        if incumbent_x is not None and bound >= incumbent_obj - gap_allow():
            pruned_floor = min(pruned_floor, bound)
            continue

        lo = arrays.col_lower.copy()
        hi = arrays.col_upper.copy()
        for vid, val in fixings:
            lo[vid] = hi[vid] = val
        nodes += 1

        if not propagate_bounds(arrays, lo, hi, feas_tol, int_tol):
            continue
        res = _box_lp(arrays, lo, hi, feas_tol)
        iterations += res.iterations
        if res.status == INFEASIBLE:
            continue
        if res.status == UNBOUNDED:
            if not fixings:
                return Solution(UNBOUNDED, None, None, INF, nodes, iterations)
            raise NumericalBreakdown("restricted subproblem reported unbounded")

        node_obj = res.objective
        if incumbent_x is not None and node_obj >= incumbent_obj - gap_allow():
            pruned_floor = min(pruned_floor, node_obj)
            continue

        x_bin = res.x[binary_ids]
        frac = np.abs(x_bin - np.round(x_bin))
        if float(frac.max()) <= int_tol:
            if node_obj < incumbent_obj:
                incumbent_obj = node_obj
                incumbent_x = res.x
                if on_incumbent is not None:
                    on_incumbent(incumbent_obj, incumbent_x)
            continue

        # Primal heuristics: cheap verified completions of the fractional
        # relaxation.  They only ever add incumbents, never cut the tree
        # beyond the normal bound test.
        for cand in _candidates(arrays, res.x, candidate_hook, feas_tol, int_tol):
            cand_x, cand_obj = cand
            if cand_obj < incumbent_obj:
                incumbent_obj = cand_obj
                incumbent_x = cand_x
                if on_incumbent is not None:
                    on_incumbent(incumbent_obj, incumbent_x)
        if incumbent_x is not None and node_obj >= incumbent_obj - gap_allow():
            pruned_floor = min(pruned_floor, node_obj)
            continue

        pick = int(np.argmax(frac))  # most fractional; argmax takes lowest id on ties
        var = int(binary_ids[pick])
        preferred = float(np.round(x_bin[pick]))
        depth = -(len(fixings) + 1)
        counter += 1
        heapq.heappush(heap, (node_obj, depth, -counter, fixings + ((var, 1.0 - preferred),)))
        counter += 1
        heapq.heappush(heap, (node_obj, depth, -counter, fixings + ((var, preferred),)))

        # Early stop once the open bound proves the incumbent near-optimal.
        if incumbent_x is not None and heap:
            best_open = heap[0][0]
            if best_open >= incumbent_obj - gap_allow():
                pruned_floor = min(pruned_floor, best_open)
                heap.clear()
                break

    if limit_status is not None:
        open_floor = min((entry[0] for entry in heap), default=INF)
        floor = min(pruned_floor, open_floor)
        if incumbent_x is None:
            return Solution(limit_status, None, None, INF, nodes, iterations)
        gap = max(0.0, (incumbent_obj - min(floor, incumbent_obj)) / max(1.0, abs(incumbent_obj)))
        return Solution(limit_status, incumbent_obj, incumbent_x, gap, nodes, iterations)

    if incumbent_x is None:
        return Solution(INFEASIBLE, None, None, INF, nodes, iterations)
    gap = 0.0
    if np.isfinite(pruned_floor) and pruned_floor < incumbent_obj:
        gap = (incumbent_obj - pruned_floor) / max(1.0, abs(incumbent_obj))
    return Solution(OPTIMAL, incumbent_obj, incumbent_x, gap, nodes, iterations)


# -- primal heuristics -------------------------------------------------------


def _candidates(arrays: ModelArrays, x: np.ndarray, candidate_hook,
                feas_tol: float, int_tol: float):
    """Yield verified (values, objective) completions of a fractional point."""
    rounded = _round_completion(arrays, x, feas_tol, int_tol)
    if rounded is not None:
        yield rounded
    if candidate_hook is not None:
        proposal = candidate_hook(x)
        if proposal is not None:
            checked = _verify_candidate(arrays, proposal, feas_tol, int_tol)
            if checked is not None:
                yield checked


def _round_completion(arrays: ModelArrays, x: np.ndarray,
                      feas_tol: float, int_tol: float):
    """Greedily round fractional binaries, keeping every row feasible.

    Only moves binary variables, so it succeeds exactly when the fractional
    ones sit in rows with enough slack (capacity indicators and the like).
    Returns a verified (values, objective) pair or None.
    """
    b = arrays.is_binary
    frac_ids = np.nonzero(b & (np.abs(x - np.round(x)) > int_tol))[0]
    if frac_ids.size == 0:
        return None
    csc = arrays.a_csc
    rlo, rhi = arrays.row_lower, arrays.row_upper
    act = arrays.a_csr @ x
    x2 = x.copy()
    for j in frac_ids:
        xj = float(x2[j])
        near = float(np.round(xj))
        placed = False
        for v in (near, 1.0 - near):
            if v < arrays.col_lower[j] - int_tol or v > arrays.col_upper[j] + int_tol:
                continue
            cols = slice(csc.indptr[j], csc.indptr[j + 1])
            rows = csc.indices[cols]
            moved = act[rows] + csc.data[cols] * (v - xj)
            if np.all(moved <= rhi[rows] + feas_tol) and np.all(moved >= rlo[rows] - feas_tol):
                act[rows] = moved
                x2[j] = v
                placed = True
                break
        if not placed:
            return None
    # Snap all binaries exactly and verify the whole point once.
    x2[b] = np.round(x2[b])
    return _verify_candidate(arrays, x2, feas_tol, int_tol)


def _verify_candidate(arrays: ModelArrays, y, feas_tol: float, int_tol: float):
    """Validate a proposed full-length point; return (values, objective) or None."""
    y = np.asarray(y, dtype=float)
    n = arrays.col_lower.shape[0]
    if y.shape != (n,) or not np.all(np.isfinite(y)):
        return None
    if np.any(y < arrays.col_lower - feas_tol) or np.any(y > arrays.col_upper + feas_tol):
        return None
    b = arrays.is_binary
    if np.any(np.abs(y[b] - np.round(y[b])) > int_tol):
        return None
    y = np.clip(y, arrays.col_lower, arrays.col_upper)
    y[b] = np.round(y[b])
    act = arrays.a_csr @ y
    if np.any(act > arrays.row_upper + feas_tol) or np.any(act < arrays.row_lower - feas_tol):
        return None
    return y, float(arrays.cost @ y)


# -- node LP with fixed-variable substitution -------------------------------


def _box_lp(arrays: ModelArrays, lo: np.ndarray, hi: np.ndarray, feas_tol: float) -> CoreResult:
    """Solve the LP over the given box, substituting out fixed variables."""
    fixed = (hi - lo) <= 1e-12
    if not fixed.any():
        return minimize_core(arrays.a_csc, arrays.row_lower, arrays.row_upper,
                             lo, hi, arrays.cost, feas_tol)

    x_fixed = np.where(fixed, 0.5 * (lo + hi), 0.0)
    shift = arrays.a_csr @ x_fixed
    row_lower = arrays.row_lower - shift
    row_upper = arrays.row_upper - shift
    base_cost = float(arrays.cost @ x_fixed)

    if fixed.all():
        ok = np.all(row_lower <= feas_tol) and np.all(row_upper >= -feas_tol)
        if not ok:
            return CoreResult(INFEASIBLE, None, INF, 0)
        return CoreResult(OPTIMAL, x_fixed.copy(), base_cost, 0)

    free_idx = np.nonzero(~fixed)[0]
    a_free = arrays.a_csc[:, free_idx].tocsr()
    keep = np.diff(a_free.indptr) > 0
    if not keep.all():
        dead_lo = row_lower[~keep]
        dead_hi = row_upper[~keep]
        if np.any(dead_lo > feas_tol) or np.any(dead_hi < -feas_tol):
            return CoreResult(INFEASIBLE, None, INF, 0)
        a_free = a_free[keep]
        row_lower = row_lower[keep]
        row_upper = row_upper[keep]

    res = minimize_core(a_free.tocsc(), row_lower, row_upper,
                        lo[free_idx], hi[free_idx], arrays.cost[free_idx], feas_tol)
    if res.status != OPTIMAL:
        return res
    x_full = x_fixed.copy()
    x_full[free_idx] = res.x
    return CoreResult(OPTIMAL, x_full, res.objective + base_cost, res.iterations)


# -- interval bound propagation ---------------------------------------------


def propagate_bounds(
    arrays: ModelArrays,
    lo: np.ndarray,
    hi: np.ndarray,
    feas_tol: float,
    int_tol: float,
    max_rounds: int = 6,
) -> bool:
    """Tighten ``lo``/``hi`` in place using constraint interval arithmetic.

    Returns False when some constraint interval is provably empty.  The
    tightenings are sound: no point feasible for the node is cut off.
    """
    a = arrays.a_csr
    if a.shape[0] == 0 or a.nnz == 0:
        return _snap_binaries(arrays, lo, hi, int_tol)

    nz_rows = np.repeat(np.arange(a.shape[0]), np.diff(a.indptr))
    nz_cols = a.indices
    nz_vals = a.data
    pos = nz_vals > 0.0
    row_lower = arrays.row_lower
    row_upper = arrays.row_upper

    for _ in range(max_rounds):
        if not _snap_binaries(arrays, lo, hi, int_tol):
            return False
        # Interval of each row's activity given the current box.
        contrib_min = nz_vals * np.where(pos, lo[nz_cols], hi[nz_cols])
        contrib_max = nz_vals * np.where(pos, hi[nz_cols], lo[nz_cols])
        min_act = np.zeros(a.shape[0])
        max_act = np.zeros(a.shape[0])
        np.add.at(min_act, nz_rows, contrib_min)
        np.add.at(max_act, nz_rows, contrib_max)
        min_act = np.nan_to_num(min_act, nan=-INF, posinf=INF, neginf=-INF)
        max_act = np.nan_to_num(max_act, nan=INF, posinf=INF, neginf=-INF)
        if np.any(min_act > row_upper + feas_tol) or np.any(max_act < row_lower - feas_tol):
            return False

        # x_j bounds implied by each row, one candidate per nonzero.
        with np.errstate(invalid="ignore"):
            rest_min = min_act[nz_rows] - contrib_min
            rest_max = max_act[nz_rows] - contrib_max
            up_room = (row_upper[nz_rows] - rest_min) / nz_vals
            lo_room = (row_lower[nz_rows] - rest_max) / nz_vals
        cand_hi = np.where(pos, up_room, lo_room)
        cand_lo = np.where(pos, lo_room, up_room)
        cand_hi = np.where(np.isnan(cand_hi), INF, cand_hi)
        cand_lo = np.where(np.isnan(cand_lo), -INF, cand_lo)

        new_hi = hi.copy()
        new_lo = lo.copy()
        np.minimum.at(new_hi, nz_cols, cand_hi)
        np.maximum.at(new_lo, nz_cols, cand_lo)
        # Keep a cushion so boundary points survive floating error.
        new_hi = np.minimum(hi, new_hi + 1e-9)
        new_lo = np.maximum(lo, new_lo - 1e-9)
        if np.any(new_lo > new_hi + 1e-9):
            return False
        crossed = new_lo > new_hi
        if crossed.any():
            mid = 0.5 * (new_lo[crossed] + new_hi[crossed])
            new_lo[crossed] = mid
            new_hi[crossed] = mid

        improved = np.any(new_hi < hi - 1e-9) or np.any(new_lo > lo + 1e-9)
        hi[:] = new_hi
        lo[:] = new_lo
        if not improved:
            break
    return _snap_binaries(arrays, lo, hi, int_tol)


def _snap_binaries(arrays: ModelArrays, lo: np.ndarray, hi: np.ndarray, int_tol: float) -> bool:
    b = arrays.is_binary
    lo[b & (lo > int_tol)] = 1.0       # binary bounds live in [0, 1]
    hi[b & (hi < 1.0 - int_tol)] = 0.0
    if np.any(lo > hi + 1e-9):
        return False
    return True
