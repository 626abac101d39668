"""Model types for linear and mixed-binary programs.

A model is a set of bounded variables, linear constraints, and a linear
objective to minimize.  Binary variables are declared by kind; the solver
relaxes them to their continuous bounds and restores integrality by
branching.  Models are built once and treated as immutable while solving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import ModelError

CONTINUOUS = "continuous"
BINARY = "binary"

LE = "<="
EQ = "=="
GE = ">="

_SENSES = (LE, EQ, GE)

INF = float("inf")


@dataclass(frozen=True)
class Variable:
    """One decision variable: dense integer id, kind, and finite-or-infinite bounds."""

    id: int
    kind: str
    lower: float
    upper: float
    name: str = ""


@dataclass(frozen=True)
class LinearConstraint:
    """A row:  sum(coef * var)  sense  rhs, with a semantic tag for audits."""

    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    tag: str = ""


class MilpModel:
    """Container for variables, constraints, and the objective.

    Variables get dense ids 0..n-1 in creation order, so solution vectors
    line up with ``variables`` by position.
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective: dict[int, float] = {}

    # -- construction -------------------------------------------------

    def add_variable(self, kind: str, lower: float, upper: float, name: str = "") -> int:
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"unknown variable kind {kind!r}")
        lower = float(lower)
        upper = float(upper)
        if not lower <= upper:
            raise ModelError(f"variable {name or len(self.variables)}: lower {lower} > upper {upper}")
        if kind == BINARY:
            if lower < 0.0 or upper > 1.0:
                raise ModelError(f"binary variable {name or len(self.variables)}: bounds must sit inside [0, 1]")
        vid = len(self.variables)
        self.variables.append(Variable(vid, kind, lower, upper, name))
        return vid

    def add_continuous(self, lower: float, upper: float, name: str = "") -> int:
        return self.add_variable(CONTINUOUS, lower, upper, name)

    def add_binary(self, name: str = "") -> int:
        return self.add_variable(BINARY, 0.0, 1.0, name)

    def add_constraint(self, terms, sense: str, rhs: float, tag: str = "") -> int:
        if sense not in _SENSES:
            raise ModelError(f"unknown constraint sense {sense!r}")
        seen = set()
        clean = []
        for vid, coef in terms:
            if not 0 <= vid < len(self.variables):
                raise ModelError(f"constraint {len(self.constraints)}: unknown variable id {vid}")
            if vid in seen:
                raise ModelError(f"constraint {len(self.constraints)}: duplicate variable id {vid}")
            seen.add(vid)
            coef = float(coef)
            if not np.isfinite(coef):
                raise ModelError(f"constraint {len(self.constraints)}: non-finite coefficient for id {vid}")
            if coef != 0.0:
                clean.append((vid, coef))
        rhs = float(rhs)
        if not np.isfinite(rhs):
            raise ModelError(f"constraint {len(self.constraints)}: non-finite rhs")
        cid = len(self.constraints)
        self.constraints.append(LinearConstraint(tuple(clean), sense, rhs, tag))
        return cid

    def set_objective_term(self, vid: int, coef: float) -> None:
        if not 0 <= vid < len(self.variables):
            raise ModelError(f"objective: unknown variable id {vid}")
        coef = float(coef)
        if not np.isfinite(coef):
            raise ModelError(f"objective: non-finite coefficient for id {vid}")
        self.objective[vid] = self.objective.get(vid, 0.0) + coef

    # -- views ----------------------------------------------------------

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(len(self.variables))
        for vid, coef in self.objective.items():
            c[vid] = coef
        return c

    def binary_ids(self) -> np.ndarray:
        return np.array([v.id for v in self.variables if v.kind == BINARY], dtype=np.int64)

    def tag_set(self) -> set[str]:
        return {c.tag for c in self.constraints if c.tag}

    def validate(self) -> None:
        """Re-check every structural invariant; raises ModelError on the first breach."""
        for v in self.variables:
            if not v.lower <= v.upper:
                raise ModelError(f"variable {v.id}: lower > upper")
            if v.kind == BINARY and (v.lower < 0.0 or v.upper > 1.0):
                raise ModelError(f"variable {v.id}: binary bounds outside [0, 1]")
            if np.isnan(v.lower) or np.isnan(v.upper):
                raise ModelError(f"variable {v.id}: NaN bound")

    def to_arrays(self) -> "ModelArrays":
        return ModelArrays.from_model(self)


@dataclass
class ModelArrays:
    """Sparse-array view of a model, shared by the solver and the auditors.

    Row activity is constrained to ``row_lower <= A x <= row_upper`` (equal
    bounds encode equalities, one-sided infinities encode inequalities).
    """

    a_csr: sparse.csr_matrix
    a_csc: sparse.csc_matrix
    row_lower: np.ndarray
    row_upper: np.ndarray
    col_lower: np.ndarray
    col_upper: np.ndarray
    cost: np.ndarray
    is_binary: np.ndarray  # bool per column

    @classmethod
    def from_model(cls, model: MilpModel) -> "ModelArrays":
        model.validate()
        n = model.num_variables
        m = model.num_constraints
        rows, cols, vals = [], [], []
        row_lower = np.empty(m)
        row_upper = np.empty(m)
        for i, con in enumerate(model.constraints):
            for vid, coef in con.terms:
                rows.append(i)
                cols.append(vid)
                vals.append(coef)
            if con.sense == LE:
                row_lower[i], row_upper[i] = -INF, con.rhs
            elif con.sense == GE:
                row_lower[i], row_upper[i] = con.rhs, INF
            else:
                row_lower[i] = row_upper[i] = con.rhs
        a = sparse.coo_matrix((vals, (rows, cols)), shape=(m, n))
        col_lower = np.array([v.lower for v in model.variables], dtype=float)
        col_upper = np.array([v.upper for v in model.variables], dtype=float)
        is_binary = np.array([v.kind == BINARY for v in model.variables], dtype=bool)
        return cls(
            a_csr=a.tocsr(),
            a_csc=a.tocsc(),
            row_lower=row_lower,
            row_upper=row_upper,
            col_lower=col_lower,
            col_upper=col_upper,
            cost=model.objective_vector(),
            is_binary=is_binary,
        )


@dataclass
class ResidualReport:
    """Feasibility audit of a candidate point against a model.

    ``residuals[i]`` is the signed slack ``activity - rhs`` of constraint i
    (for range-style reporting both violation directions fold into
    ``violations[i] >= 0``).  Binary integrality breaches are listed
    separately and never mix into ``max_violation``.
    """

    residuals: np.ndarray
    violations: np.ndarray
    max_violation: float
    bound_violations: list[tuple[int, float]]
    max_bound_violation: float
    integrality_violations: list[tuple[int, float]]
    max_integrality_violation: float

    def ok(self, tol: float) -> bool:
        return (
            self.max_violation <= tol
            and self.max_bound_violation <= tol
            and not self.integrality_violations
        )


def check_solution(model: MilpModel, values: np.ndarray, tol: float = 1e-6) -> ResidualReport:
    """Audit ``values`` against every constraint, bound, and binary of ``model``."""
    values = np.asarray(values, dtype=float)
    if values.shape != (model.num_variables,):
        raise ModelError(
            f"check_solution: got {values.shape[0] if values.ndim == 1 else values.shape} values "
            f"for {model.num_variables} variables"
        )
    arrays = model.to_arrays()
    activity = arrays.a_csr @ values if model.num_constraints else np.zeros(0)
    residuals = np.zeros(model.num_constraints)
    violations = np.zeros(model.num_constraints)
    for i, con in enumerate(model.constraints):
        residuals[i] = activity[i] - con.rhs
        if con.sense == LE:
            violations[i] = max(0.0, residuals[i])
        elif con.sense == GE:
            violations[i] = max(0.0, -residuals[i])
        else:
            violations[i] = abs(residuals[i])
    below = np.maximum(0.0, arrays.col_lower - values)
    above = np.maximum(0.0, values - arrays.col_upper)
    bound_gap = np.maximum(below, above)
    bound_violations = [(int(j), float(bound_gap[j])) for j in np.nonzero(bound_gap > tol)[0]]
    int_gap = np.where(arrays.is_binary, np.abs(values - np.round(values)), 0.0)
    integrality = [(int(j), float(int_gap[j])) for j in np.nonzero(int_gap > tol)[0]]
    return ResidualReport(
        residuals=residuals,
        violations=violations,
        max_violation=float(violations.max()) if len(violations) else 0.0,
        bound_violations=bound_violations,
        max_bound_violation=float(bound_gap.max()) if len(bound_gap) else 0.0,
        integrality_violations=integrality,
        max_integrality_violation=float(int_gap.max()) if len(int_gap) else 0.0,
    )


def _fmt(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return format(x, ".17g")


def dump_model(model: MilpModel) -> str:
    """Render the full model in a fixed, diff-friendly text layout."""
    lines = [f"model {model.name or '(unnamed)'} vars={model.num_variables} cons={model.num_constraints}"]
    lines.append("variables:")
    for v in model.variables:
        lines.append(f"  x{v.id} {v.kind} [{_fmt(v.lower)}, {_fmt(v.upper)}] {v.name}".rstrip())
    lines.append("minimize:")
    if model.objective:
        terms = " ".join(
            f"{'+' if coef >= 0 else '-'} {_fmt(abs(coef))}*x{vid}"
            for vid, coef in sorted(model.objective.items())
        )
        lines.append(f"  {terms}")
    else:
        lines.append("  0")
    lines.append("subject to:")
    for i, con in enumerate(model.constraints):
        terms = " ".join(
            f"{'+' if coef >= 0 else '-'} {_fmt(abs(coef))}*x{vid}" for vid, coef in con.terms
        ) or "0"
        tag = f"  [{con.tag}]" if con.tag else ""
        lines.append(f"  c{i}: {terms} {con.sense} {_fmt(con.rhs)}{tag}")
    return "\n".join(lines) + "\n"
