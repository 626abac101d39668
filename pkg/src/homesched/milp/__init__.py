"""Embedded LP/MILP solver: model types, simplex engine, branch-and-bound."""

from .model import (
    BINARY,
    CONTINUOUS,
    EQ,
    GE,
    LE,
    LinearConstraint,
    MilpModel,
    ResidualReport,
    Variable,
    check_solution,
    dump_model,
)
from .solve import (
    INFEASIBLE,
    NODE_LIMIT,
    OPTIMAL,
    TIME_LIMIT,
    UNBOUNDED,
    Solution,
    SolveOptions,
    propagate_bounds,
    solve_lp,
    solve_milp,
)

__all__ = [
    "BINARY",
    "CONTINUOUS",
    "EQ",
    "GE",
    "LE",
    "INFEASIBLE",
    "NODE_LIMIT",
    "OPTIMAL",
    "TIME_LIMIT",
    "UNBOUNDED",
    "LinearConstraint",
    "MilpModel",
    "ResidualReport",
    "Solution",
    "SolveOptions",
    "Variable",
    "check_solution",
    "dump_model",
    "propagate_bounds",
    "solve_lp",
    "solve_milp",
]
