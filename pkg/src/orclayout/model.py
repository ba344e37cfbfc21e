"""Core layout model: variables, linear expressions, formulas, clauses, widgets.

Coordinates are pixels as reals, origin top-left, y grows downward. `right`
and `bottom` are expression sugar (left + width / top + height), never stored
variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

ATTRIBUTES = ("left", "top", "width", "height")

#: Slack below which a coefficient is treated as zero and dropped.
COEFF_ZERO_TOL = 1e-12

#: Tolerance for evaluating whether an atom holds under an assignment.
EVAL_TOL = 1e-6

#: Default margin used when negating non-strict inequalities.
DEFAULT_EPSILON = 1.0


class LayoutError(Exception):
    """Base class for model construction errors."""


class DuplicateWidgetId(LayoutError):
    pass


class DuplicateLabel(LayoutError):
    pass


class BadSizeOrdering(LayoutError):
    pass


class UnboundVariable(LayoutError):
    pass


@dataclass(frozen=True, order=True)
class VarId:
    """A layout variable: one geometric attribute of one widget."""

    widget: str
    attribute: str

    def __post_init__(self):
        if self.attribute not in ATTRIBUTES:
            raise ValueError(f"unknown attribute {self.attribute!r}")

    def __repr__(self):
        return f"{self.widget}.{self.attribute}"


class LinExpr:
    """Immutable linear expression: sum of coefficient*variable plus constant."""

    __slots__ = ("terms", "constant", "_hash")

    def __init__(self, terms: Optional[Mapping[VarId, float]] = None, constant: float = 0.0):
        clean = {}
        if terms:
            for v, c in terms.items():
                c = float(c)
                if abs(c) > COEFF_ZERO_TOL:
                    clean[v] = c
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "constant", float(constant))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("LinExpr is immutable")

    @staticmethod
    def var(v: VarId, coeff: float = 1.0) -> LinExpr:
        return LinExpr({v: coeff})

    @staticmethod
    def const(k: float) -> LinExpr:
        return LinExpr({}, k)

    def __add__(self, other: Union[LinExpr, float, int]) -> LinExpr:
        if isinstance(other, (int, float)):
            return LinExpr(self.terms, self.constant + other)
        merged = dict(self.terms)
        for v, c in other.terms.items():
            merged[v] = merged.get(v, 0.0) + c
        return LinExpr(merged, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> LinExpr:
        return LinExpr({v: -c for v, c in self.terms.items()}, -self.constant)

    def __sub__(self, other: Union[LinExpr, float, int]) -> LinExpr:
        if isinstance(other, (int, float)):
            return LinExpr(self.terms, self.constant - other)
        return self + (-other)

    def __rsub__(self, other: Union[float, int]) -> LinExpr:
        return (-self) + other

    def __mul__(self, k: float) -> LinExpr:
        return LinExpr({v: c * k for v, c in self.terms.items()}, self.constant * k)

    __rmul__ = __mul__

    def evaluate(self, assignment: Mapping[VarId, float]) -> float:
        total = self.constant
        for v, c in self.terms.items():
            if v not in assignment:
                raise UnboundVariable(str(v))
            total += c * assignment[v]
        return total

    def variables(self) -> set[VarId]:
        return set(self.terms)

    def key(self):
        """Canonical hashable key for the variable part (constant excluded)."""
        return tuple(sorted(((v, c) for v, c in self.terms.items())))

    def __eq__(self, other):
        return (
            isinstance(other, LinExpr)
            and self.constant == other.constant
            and self.terms == other.terms
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.key(), self.constant))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        parts = [f"{c:+g}*{v}" for v, c in sorted(self.terms.items())]
        parts.append(f"{self.constant:+g}")
        return " ".join(parts)


class Relation(Enum):
    EQ = "=="
    LE = "<="
    GE = ">="


@dataclass(frozen=True)
class Atom:
    """Relational atom in canonical form: lhs ⋈ 0 with the rhs folded in."""

    lhs: LinExpr
    relation: Relation

    def evaluate(self, assignment: Mapping[VarId, float], tol: float = EVAL_TOL) -> bool:
        value = self.lhs.evaluate(assignment)
        if self.relation is Relation.EQ:
            return abs(value) <= tol
        if self.relation is Relation.LE:
            return value <= tol
        return value >= -tol

    def __repr__(self):
        return f"({self.lhs} {self.relation.value} 0)"


def atom(lhs: LinExpr, relation: Relation, rhs: Union[LinExpr, float, int] = 0.0) -> Atom:
    """Build a canonical atom lhs ⋈ rhs, folding rhs into the left side."""
    if isinstance(rhs, (int, float)):
        rhs = LinExpr.const(rhs)
    return Atom(lhs - rhs, relation)


def eq(lhs, rhs=0.0) -> Atom:
    return atom(lhs, Relation.EQ, rhs)


def le(lhs, rhs=0.0) -> Atom:
    return atom(lhs, Relation.LE, rhs)


def ge(lhs, rhs=0.0) -> Atom:
    return atom(lhs, Relation.GE, rhs)


@dataclass(frozen=True)
class And:
    children: tuple  # of Formula

    def __repr__(self):
        return "And(" + ", ".join(map(repr, self.children)) + ")"


@dataclass(frozen=True)
class Or:
    children: tuple  # of Formula; order encodes disjunct preference

    def __repr__(self):
        return "Or(" + ", ".join(map(repr, self.children)) + ")"


@dataclass(frozen=True)
class Not:
    child: "Formula"

    def __repr__(self):
        return f"Not({self.child!r})"


Formula = Union[Atom, And, Or, Not]


def conj(*children: Formula) -> Formula:
    return children[0] if len(children) == 1 else And(tuple(children))


def disj(*children: Formula) -> Formula:
    return children[0] if len(children) == 1 else Or(tuple(children))


def negate_atom(a: Atom, epsilon: float) -> Formula:
    """Negate a non-strict atom, relaxing strictness by an epsilon margin.

    ¬(e ≤ 0) ↦ e ≥ ε, ¬(e ≥ 0) ↦ e ≤ −ε, ¬(e = 0) ↦ (e ≤ −ε) OR (e ≥ ε).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    e = a.lhs
    if a.relation is Relation.LE:
        return Atom(e - epsilon, Relation.GE)
    if a.relation is Relation.GE:
        return Atom(e + epsilon, Relation.LE)
    return Or((Atom(e + epsilon, Relation.LE), Atom(e - epsilon, Relation.GE)))


def nnf(f: Formula, epsilon: float = DEFAULT_EPSILON) -> Formula:
    """Negation normal form with same-type flattening.

    Equivalent to the input modulo the ε-relaxation of negated atoms; the
    result contains no Not nodes and no And(And(...))/Or(Or(...)) nesting.
    """
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        g = f.child
        if isinstance(g, Atom):
            return negate_atom(g, epsilon)
        if isinstance(g, Not):
            return nnf(g.child, epsilon)
        if isinstance(g, And):
            return nnf(Or(tuple(Not(c) for c in g.children)), epsilon)
        return nnf(And(tuple(Not(c) for c in g.children)), epsilon)
    ctor = And if isinstance(f, And) else Or
    flat: list[Formula] = []
    for child in f.children:
        c = nnf(child, epsilon)
        if isinstance(c, ctor):
            flat.extend(c.children)
        else:
            flat.append(c)
    if len(flat) == 1:
        return flat[0]
    return ctor(tuple(flat))


def eval_formula(f: Formula, assignment: Mapping[VarId, float], tol: float = EVAL_TOL) -> bool:
    """Evaluate a formula under an assignment; atoms hold within `tol` pixels."""
    if isinstance(f, Atom):
        return f.evaluate(assignment, tol)
    if isinstance(f, And):
        return all(eval_formula(c, assignment, tol) for c in f.children)
    if isinstance(f, Or):
        return any(eval_formula(c, assignment, tol) for c in f.children)
    return not eval_formula(f.child, assignment, tol)


def formula_atoms(f: Formula) -> Iterable[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from formula_atoms(f.child)
    else:
        for c in f.children:
            yield from formula_atoms(c)


class Strength(Enum):
    HARD = "hard"
    SOFT = "soft"


@dataclass(frozen=True)
class Clause:
    """A formula tagged hard or soft-with-weight; the unit of the objective.

    `group` is an optional hint naming a set of soft clauses the emitting
    pattern believes mutually exclusive; the solver verifies the hint before
    using it for pruning.
    """

    label: str
    formula: Formula
    strength: Strength = Strength.HARD
    weight: float = 0.0
    group: Optional[str] = None

    def __post_init__(self):
        if self.strength is Strength.SOFT and not self.weight > 0:
            raise ValueError(f"soft clause {self.label!r} needs a positive weight")
        if self.strength is Strength.HARD and self.weight:
            raise ValueError(f"hard clause {self.label!r} must not carry a weight")

    @property
    def is_hard(self) -> bool:
        return self.strength is Strength.HARD


def hard(label: str, formula: Formula, group: Optional[str] = None) -> Clause:
    return Clause(label, formula, Strength.HARD, 0.0, group)


def soft(label: str, formula: Formula, weight: float, group: Optional[str] = None) -> Clause:
    return Clause(label, formula, Strength.SOFT, weight, group)


class Priority(Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


@dataclass(frozen=True)
class Widget:
    """A rectangular widget with min/pref/max size bounds."""

    id: str
    pref: tuple[float, float]
    min: tuple[float, float] = (0.0, 0.0)
    max: Optional[tuple[float, float]] = None
    kind: str = "widget"
    priority: Priority = Priority.MEDIUM

    def __post_init__(self):
        hi = self.max if self.max is not None else (math.inf, math.inf)
        for i in (0, 1):
            if not (0 <= self.min[i] <= self.pref[i] <= hi[i]):
                raise BadSizeOrdering(
                    f"widget {self.id!r}: need 0 <= min <= pref <= max on axis {i}"
                )

    def var(self, attribute: str) -> VarId:
        return VarId(self.id, attribute)

    @property
    def left(self) -> LinExpr:
        return LinExpr.var(self.var("left"))

    @property
    def top(self) -> LinExpr:
        return LinExpr.var(self.var("top"))

    @property
    def width(self) -> LinExpr:
        return LinExpr.var(self.var("width"))

    @property
    def height(self) -> LinExpr:
        return LinExpr.var(self.var("height"))

    @property
    def right(self) -> LinExpr:
        return self.left + self.width

    @property
    def bottom(self) -> LinExpr:
        return self.top + self.height


@dataclass(frozen=True)
class LayoutProblem:
    """Widgets, viewport, and all clauses; the solver's input."""

    widgets: tuple[Widget, ...]
    viewport: tuple[float, float]
    clauses: tuple[Clause, ...]
    epsilon: float = DEFAULT_EPSILON

    def variables(self) -> list[VarId]:
        return [w.var(a) for w in self.widgets for a in ATTRIBUTES]

    def widget_by_id(self, wid: str) -> Widget:
        for w in self.widgets:
            if w.id == wid:
                return w
        raise KeyError(wid)

    def clause_by_label(self, label: str) -> Clause:
        for c in self.clauses:
            if c.label == label:
                return c
        raise KeyError(label)

    def hard_clauses(self) -> list[Clause]:
        return [c for c in self.clauses if c.is_hard]

    def soft_clauses(self) -> list[Clause]:
        return [c for c in self.clauses if not c.is_hard]

    def total_soft_weight(self) -> float:
        return sum(c.weight for c in self.soft_clauses())


@dataclass(frozen=True)
class Solution:
    """A solved layout: assignment plus objective bookkeeping."""

    assignment: dict[VarId, float]
    satisfied_weight: float
    total_soft_weight: float
    branch_choices: dict[str, int]  # clause label -> 1-based root disjunct
    optimal: bool
    solve_time: float = 0.0

    def rect(self, wid: str) -> tuple[float, float, float, float]:
        get = self.assignment.__getitem__
        return (
            get(VarId(wid, "left")),
            get(VarId(wid, "top")),
            get(VarId(wid, "width")),
            get(VarId(wid, "height")),
        )

    def visible(self, wid: str, tol: float = EVAL_TOL) -> bool:
        _, _, w, h = self.rect(wid)
        return w > tol and h > tol


def box_clause(widget: Widget, viewport: tuple[float, float]) -> Clause:
    """Hard per-widget box: size within min/max, position inside the viewport."""
    atoms: list[Formula] = [
        ge(widget.width, widget.min[0]),
        ge(widget.height, widget.min[1]),
    ]
    if widget.max is not None:
        atoms.append(le(widget.width, widget.max[0]))
        atoms.append(le(widget.height, widget.max[1]))
    atoms.extend(
        [
            ge(widget.left, 0.0),
            ge(widget.top, 0.0),
            le(widget.right, viewport[0]),
            le(widget.bottom, viewport[1]),
        ]
    )
    return hard(f"box:{widget.id}", And(tuple(atoms)))


def pref_clauses(widget: Widget, weight: float = 1.0) -> list[Clause]:
    return [
        soft(f"pref_w:{widget.id}", eq(widget.width, widget.pref[0]), weight),
        soft(f"pref_h:{widget.id}", eq(widget.height, widget.pref[1]), weight),
    ]


def assemble_problem(
    widgets: Iterable[Widget],
    viewport: tuple[float, float],
    clauses: Iterable[Clause] = (),
    epsilon: float = DEFAULT_EPSILON,
    suppress_pref: Iterable[str] = (),
) -> LayoutProblem:
    """Assemble a problem, auto-adding box constraints and pref-size softs.

    Auto clauses precede user clauses in declaration order. `suppress_pref`
    names widgets whose pref-size softs a pattern overrides with its own.
    """
    widgets = tuple(widgets)
    clauses = tuple(clauses)
    suppress = set(suppress_pref)
    seen_ids: set[str] = set()
    for w in widgets:
        if w.id in seen_ids:
            raise DuplicateWidgetId(w.id)
        seen_ids.add(w.id)
    out: list[Clause] = []
    for w in widgets:
        out.append(box_clause(w, viewport))
        if w.id not in suppress:
            out.extend(pref_clauses(w))
    out.extend(clauses)
    labels: set[str] = set()
    for c in out:
        if c.label in labels:
            raise DuplicateLabel(c.label)
        labels.add(c.label)
    for c in out:
        for a in formula_atoms(c.formula):
            for v in a.lhs.terms:
                if v.widget not in seen_ids:
                    raise LayoutError(f"clause {c.label!r} references unknown widget {v.widget!r}")
    return LayoutProblem(widgets, (float(viewport[0]), float(viewport[1])), tuple(out), epsilon)
