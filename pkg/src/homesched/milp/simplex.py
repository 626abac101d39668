"""Bounded-variable two-phase revised simplex.

Minimizes ``c'x`` subject to ``row_lower <= A x <= row_upper`` and
``col_lower <= x <= col_upper``.  Every row i carries a logical column
(``A_i x = s_i`` with the row bounds moved onto ``s_i``), so the starting
basis is diagonal; rows whose logical value starts outside its bounds get a
unit artificial column that phase 1 prices to zero.  The basis inverse is
held as a sparse LU factorization plus a chain of product-form (eta)
updates, rebuilt every few dozen pivots or whenever a verification pass
disagrees with the incremental state.

Pricing is Dantzig (most negative reduced cost); after a run of degenerate
pivots the engine drops to Bland's rule for the rest of the phase, which
cannot cycle.  All tie-breaking is by lowest index, so repeated solves of
the same data take identical pivot paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from ..errors import ModelError, NumericalBreakdown

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

NB_LOWER, NB_UPPER, IN_BASIS, NB_FREE = 0, 1, 2, 3

_REFRESH_PIVOTS = 64      # rebuild LU after this many eta updates
_STALL_LIMIT = 50         # degenerate steps before Bland's rule engages
_DJ_TOL = 1e-9            # reduced-cost significance
_PIVOT_TOL = 1e-9         # smallest |coefficient| allowed to block/pivot
_PIVOT_ADMIT = 1e-7       # pivots below this are re-checked on fresh factors
_RATIO_TIE = 1e-9
_DEGENERATE_STEP = 1e-10

INF = float("inf")


@dataclass
class CoreResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int


def minimize_core(
    a_csc: sparse.csc_matrix,
    row_lower: np.ndarray,
    row_upper: np.ndarray,
    col_lower: np.ndarray,
    col_upper: np.ndarray,
    cost: np.ndarray,
    feasibility_tol: float = 1e-7,
) -> CoreResult:
    """Solve one LP.  Raises NumericalBreakdown instead of guessing."""
    m, n = a_csc.shape
    col_lower = np.array(col_lower, dtype=float)
    col_upper = np.array(col_upper, dtype=float)
    row_lower = np.array(row_lower, dtype=float)
    row_upper = np.array(row_upper, dtype=float)
    cost = np.asarray(cost, dtype=float)
    for arr, label in ((col_lower, "column lower"), (col_upper, "column upper"),
                       (row_lower, "row lower"), (row_upper, "row upper"), (cost, "cost")):
        if np.isnan(arr).any():
            raise ModelError(f"{label} bounds contain NaN")

    # Crossed bounds: tiny crossings are numerical residue from tightening,
    # real crossings mean an infeasible box.
    crossed = col_lower > col_upper
    if crossed.any():
        if np.any(col_lower[crossed] - col_upper[crossed] > 1e-9):
            return CoreResult(INFEASIBLE, None, INF, 0)
        mid = 0.5 * (col_lower[crossed] + col_upper[crossed])
        col_lower[crossed] = mid
        col_upper[crossed] = mid
    if np.any(row_lower > row_upper + 1e-9):
        return CoreResult(INFEASIBLE, None, INF, 0)

    if n == 0:
        ok = np.all(row_lower <= feasibility_tol) and np.all(row_upper >= -feasibility_tol)
        return CoreResult(OPTIMAL if ok else INFEASIBLE, np.zeros(0), 0.0, 0)
    if m == 0:
        x = np.where(
            cost > 0.0,
            col_lower,
            np.where(cost < 0.0, col_upper,
                     np.where(np.isfinite(col_lower), col_lower,
                              np.where(np.isfinite(col_upper), col_upper, 0.0))),
        )
        if not np.all(np.isfinite(x[cost != 0.0])):
            return CoreResult(UNBOUNDED, None, -INF, 0)
        x = np.where(np.isfinite(x), x, 0.0)
        return CoreResult(OPTIMAL, x, float(cost @ x), 0)

    engine = _Engine(a_csc, row_lower, row_upper, col_lower, col_upper, cost, feasibility_tol)
    return engine.run()


class _Engine:
    """One LP solve.  Columns: [0, n) structural, [n, n+m) logical, then artificial."""

    def __init__(self, a_csc, row_lower, row_upper, col_lower, col_upper, cost, feas_tol):
        self.m, self.n = a_csc.shape
        self.a_csc = a_csc.tocsc()
        self.a_csc.sum_duplicates()
        self.feas_tol = feas_tol
        m, n = self.m, self.n

        self.lo = np.concatenate([col_lower, row_lower])
        self.up = np.concatenate([col_upper, row_upper])
        self.cost2 = np.concatenate([cost, np.zeros(m)])

        # Structural variables start at their nearest finite bound (lower wins).
        lo_fin = np.isfinite(col_lower)
        up_fin = np.isfinite(col_upper)
        x_struct = np.where(lo_fin, col_lower, np.where(up_fin, col_upper, 0.0))
        status_struct = np.where(
            lo_fin, NB_LOWER, np.where(up_fin, NB_UPPER, NB_FREE)
        ).astype(np.int8)

        logical = self.a_csc @ x_struct
        self.basis = np.empty(m, dtype=np.int64)
        art_rows: list[int] = []
        art_signs: list[float] = []
        status_logical = np.full(m, IN_BASIS, dtype=np.int8)
        x_logical = logical.copy()
        x_art: list[float] = []
        for i in range(m):
            if logical[i] < row_lower[i] - 1e-12:
                pin = row_lower[i]
            elif logical[i] > row_upper[i] + 1e-12:
                pin = row_upper[i]
            else:
                self.basis[i] = n + i
                continue
            sign = 1.0 if pin > logical[i] else -1.0
            status_logical[i] = NB_LOWER if pin == row_lower[i] else NB_UPPER
            x_logical[i] = pin
            self.basis[i] = n + m + len(art_rows)
            art_rows.append(i)
            art_signs.append(sign)
            x_art.append(abs(pin - logical[i]))

        self.art_rows = np.array(art_rows, dtype=np.int64)
        self.art_signs = np.array(art_signs, dtype=float)
        n_art = len(art_rows)
        self.n_art = n_art
        self.ncols = n + m + n_art

        self.lo = np.concatenate([self.lo, np.zeros(n_art)])
        self.up = np.concatenate([self.up, np.full(n_art, INF)])
        self.cost2 = np.concatenate([self.cost2, np.zeros(n_art)])
        self.x = np.concatenate([x_struct, x_logical, np.array(x_art)])
        self.status = np.concatenate([status_struct, status_logical,
                                      np.full(n_art, IN_BASIS, dtype=np.int8)])

        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []
        self.iterations = 0
        self.max_iterations = 50 * (m + n) + 2000

    # -- column access --------------------------------------------------

    def _column(self, j):
        n, m = self.n, self.m
        if j < n:
            sl = slice(self.a_csc.indptr[j], self.a_csc.indptr[j + 1])
            return self.a_csc.indices[sl], self.a_csc.data[sl]
        if j < n + m:
            return np.array([j - n]), np.array([-1.0])
        k = j - n - m
        return np.array([self.art_rows[k]]), np.array([self.art_signs[k]])

    # -- factorization ----------------------------------------------------

    def _refactor(self):
        rows, cols, vals = [], [], []
        for k, j in enumerate(self.basis):
            ri, vv = self._column(j)
            rows.append(ri)
            cols.append(np.full(len(ri), k, dtype=np.int64))
            vals.append(vv)
        b = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.m, self.m),
        ).tocsc()
        try:
            self.lu = sparse_linalg.splu(b)
        except RuntimeError as exc:  # singular factor
            raise NumericalBreakdown(f"basis factorization failed: {exc}") from exc
        self.etas = []
        self._recompute_basic_values()

    def _ftran(self, v: np.ndarray) -> np.ndarray:
        z = self.lu.solve(v)
        for r, w in self.etas:
            zr = z[r] / w[r]
            if zr != 0.0:
                z -= w * zr
            z[r] = zr
        return z

    def _btran(self, v: np.ndarray) -> np.ndarray:
        y = v.copy()
        for r, w in reversed(self.etas):
            s = w @ y - w[r] * y[r]
            y[r] = (y[r] - s) / w[r]
        return self.lu.solve(y, trans="T")

    def _system_residual(self) -> np.ndarray:
        """Residual of A x - s + (artificials) = 0 at the current point."""
        r = self.a_csc @ self.x[: self.n] - self.x[self.n : self.n + self.m]
        if self.n_art:
            np.add.at(r, self.art_rows, self.art_signs * self.x[self.n + self.m :])
        return r

    def _recompute_basic_values(self):
        r = self._system_residual()
        if np.any(r != 0.0):
            delta = self._ftran(r)
            self.x[self.basis] -= delta
        r = self._system_residual()
        scale = 1.0 + float(np.max(np.abs(self.x))) if self.ncols else 1.0
        if float(np.max(np.abs(r), initial=0.0)) > 1e-6 * scale:
            raise NumericalBreakdown("basic solution drifted beyond repair")

    # -- pricing / ratio test ---------------------------------------------

    def _reduced_costs(self, cost_vec):
        c_b = cost_vec[self.basis]
        y = self._btran(c_b)
        d = np.empty(self.ncols)
        n, m = self.n, self.m
        d[:n] = cost_vec[:n] - (y @ self.a_csc)
        d[n : n + m] = cost_vec[n : n + m] + y
        if self.n_art:
            d[n + m :] = cost_vec[n + m :] - self.art_signs * y[self.art_rows]
        return d

    def _choose_entering(self, d, bland):
        movable = self.up > self.lo
        eligible = (
            ((self.status == NB_LOWER) & movable & (d < -_DJ_TOL))
            | ((self.status == NB_UPPER) & movable & (d > _DJ_TOL))
            | ((self.status == NB_FREE) & (np.abs(d) > _DJ_TOL))
        )
        if not eligible.any():
            return -1
        if bland:
            return int(np.nonzero(eligible)[0][0])
        score = np.where(eligible, np.abs(d), -1.0)
        return int(np.argmax(score))

    def _run_phase(self, cost_vec, phase: int) -> str:
        bland = False
        stall = 0
        while True:
            self.iterations += 1
            if self.iterations > self.max_iterations:
                raise NumericalBreakdown(f"phase {phase}: iteration limit exceeded")

            d = self._reduced_costs(cost_vec)
            q = self._choose_entering(d, bland)
            if q < 0:
                if self.etas:
                    # Verify the claim against a fresh factorization before
                    # accepting it; eta drift can hide eligible columns.
                    self._refactor()
                    d = self._reduced_costs(cost_vec)
                    q = self._choose_entering(d, bland)
                    if q < 0:
                        return OPTIMAL
                else:
                    return OPTIMAL

            sgn = 1.0 if d[q] < 0.0 else -1.0
            col = np.zeros(self.m)
            ri, vv = self._column(q)
            col[ri] = vv
            w = self._ftran(col)
            delta = sgn * w

            x_b = self.x[self.basis]
            lo_b = self.lo[self.basis]
            up_b = self.up[self.basis]
            t_arr = np.full(self.m, INF)
            with np.errstate(invalid="ignore"):
                pos = delta > _PIVOT_TOL
                neg = delta < -_PIVOT_TOL
                t_arr[pos] = (x_b[pos] - lo_b[pos]) / delta[pos]
                t_arr[neg] = (x_b[neg] - up_b[neg]) / delta[neg]
            t_arr = np.where(np.isnan(t_arr), INF, np.maximum(t_arr, 0.0))
            t_basic = float(t_arr.min()) if self.m else INF
            t_own = self.up[q] - self.lo[q]

            if t_own <= t_basic:
                if not np.isfinite(t_own):
                    if phase == 1:
                        raise NumericalBreakdown("phase 1 claims an unbounded direction")
                    return UNBOUNDED
                # Bound flip: the entering variable crosses to its other bound.
                self.x[self.basis] = x_b - delta * t_own
                self.x[q] = self.up[q] if self.status[q] == NB_LOWER else self.lo[q]
                self.status[q] = NB_UPPER if self.status[q] == NB_LOWER else NB_LOWER
                stall = 0
                continue

            if not np.isfinite(t_basic):
                if phase == 1:
                    raise NumericalBreakdown("phase 1 claims an unbounded direction")
                return UNBOUNDED

            ties = np.nonzero(t_arr <= t_basic + _RATIO_TIE)[0]
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(delta[ties]))])
            if abs(delta[r]) < _PIVOT_ADMIT and self.etas:
                # A pivot this small may be pure eta drift; a column computed
                # from fresh factors decides whether it is real.
                self._refactor()
                continue
            step = max(0.0, float(t_arr[r]))

            self.x[self.basis] = x_b - delta * step
            self.x[q] = self.x[q] + sgn * step
            leaving = int(self.basis[r])
            if delta[r] > 0.0:
                self.x[leaving] = self.lo[leaving]
                self.status[leaving] = NB_LOWER
            else:
                self.x[leaving] = self.up[leaving]
                self.status[leaving] = NB_UPPER
            self.basis[r] = q
            self.status[q] = IN_BASIS
            self.etas.append((r, w.copy()))
            if len(self.etas) >= _REFRESH_PIVOTS:
                self._refactor()

            if step <= _DEGENERATE_STEP:
                stall += 1
                if stall > _STALL_LIMIT:
                    bland = True
            else:
                stall = 0

    # -- driver -----------------------------------------------------------

    def run(self) -> CoreResult:
        self._refactor()
        if self.n_art:
            cost1 = np.zeros(self.ncols)
            cost1[self.n + self.m :] = 1.0
            status = self._run_phase(cost1, phase=1)
            if status != OPTIMAL:
                raise NumericalBreakdown("phase 1 ended in an impossible state")
            infeasibility = float(np.maximum(self.x[self.n + self.m :], 0.0).sum())
            if infeasibility > self.feas_tol:
                return CoreResult(INFEASIBLE, None, INF, self.iterations)
            # Pin every artificial at zero for phase 2; any residual value is
            # below feas_tol and gets repaired at the next refactorization.
            self.up[self.n + self.m :] = 0.0

        status = self._run_phase(self.cost2, phase=2)
        if status == UNBOUNDED:
            return CoreResult(UNBOUNDED, None, -INF, self.iterations)
        x_struct = self.x[: self.n].copy()
        objective = float(self.cost2[: self.n] @ x_struct)
        return CoreResult(OPTIMAL, x_struct, objective, self.iterations)
