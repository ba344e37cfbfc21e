"""orclayout: adaptive GUI layout with hard/soft/OR linear constraints."""

from .model import (
    And,
    Atom,
    Clause,
    LayoutProblem,
    LinExpr,
    Not,
    Or,
    Priority,
    Relation,
    Solution,
    Strength,
    VarId,
    Widget,
    assemble_problem,
    eq,
    eval_formula,
    ge,
    hard,
    le,
    negate_atom,
    nnf,
    soft,
)
from .solver import (
    EditBatch,
    HardInfeasible,
    WarmStart,
    brute_force_solve,
    explain_infeasible,
    resolve_incremental,
    solve,
)

__all__ = [
    "And",
    "Atom",
    "Clause",
    "EditBatch",
    "HardInfeasible",
    "LayoutProblem",
    "LinExpr",
    "Not",
    "Or",
    "Priority",
    "Relation",
    "Solution",
    "Strength",
    "VarId",
    "WarmStart",
    "Widget",
    "assemble_problem",
    "brute_force_solve",
    "eq",
    "eval_formula",
    "explain_infeasible",
    "ge",
    "hard",
    "le",
    "negate_atom",
    "nnf",
    "resolve_incremental",
    "soft",
    "solve",
]
