"""Incremental simplex over conjunctions of linear atoms.

Atoms become bounds on problem variables or on slack variables defined by
permanent tableau rows; push/pop manipulates only the bounds, so re-asserting
an atom seen before is cheap. Feasibility repair and optimization both pivot
with Bland's smallest-index rule for determinism and termination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Iterable, Mapping, Optional, Union

from .model import Atom, LinExpr, Relation, VarId

#: A bound counts as satisfied if violated by no more than this.
FEAS_TOL = 1e-7

#: Coefficients smaller than this are dropped during row arithmetic.
PIVOT_TOL = 1e-9

#: Hard cap on pivots per check/optimize call; hitting it is an internal error.
PIVOT_CAP = 10**6


class LpStatus(Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: LpStatus
    assignment: dict[VarId, float] = field(default_factory=dict)
    value: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return self.status in (LpStatus.FEASIBLE, LpStatus.OPTIMAL)


class StaleMark(Exception):
    pass


class CalledOnInfeasibleContext(Exception):
    pass


class PivotCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ContextMark:
    serial: int
    trail_len: int


class Tableau:
    """Mutable simplex state; single-threaded, deterministic."""

    def __init__(self):
        self._keys: list[Hashable] = []
        self._index: dict[Hashable, int] = {}
        self._lower: list[float] = []
        self._upper: list[float] = []
        self._value: list[float] = []
        self._rows: dict[int, dict[int, float]] = {}  # basic var -> expression over nonbasics
        self._cols: dict[int, set[int]] = {}  # var -> basic rows mentioning it
        self._slack_of_expr: dict[tuple, int] = {}
        self._broken: set[int] = set()  # vars with lower > upper
        self._trail: list[tuple[int, float, float]] = []
        self._marks: dict[int, int] = {}
        self._next_serial = 0

    # -- variables ---------------------------------------------------------

    def var_index(self, key: Hashable) -> int:
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._keys)
            self._keys.append(key)
            self._index[key] = idx
            self._lower.append(-math.inf)
            self._upper.append(math.inf)
            self._value.append(0.0)
            self._cols[idx] = set()
        return idx

    def _slack_for(self, terms: Mapping[Hashable, float]) -> int:
        items = sorted(terms.items(), key=lambda kv: repr(kv[0]))
        cache_key = tuple((repr(k), c) for k, c in items)
        idx = self._slack_of_expr.get(cache_key)
        if idx is not None:
            return idx
        idx = self.var_index(("slack", len(self._slack_of_expr)))
        self._slack_of_expr[cache_key] = idx
        row: dict[int, float] = {}
        beta = 0.0
        for k, c in items:
            j = self.var_index(k)
            beta += c * self._value[j]
            if j in self._rows:
                for jj, a in self._rows[j].items():
                    row[jj] = row.get(jj, 0.0) + c * a
            else:
                row[j] = row.get(j, 0.0) + c
        row = {j: a for j, a in row.items() if abs(a) > PIVOT_TOL}
        self._rows[idx] = row
        for j in row:
            self._cols[j].add(idx)
        self._value[idx] = beta
        return idx

    # -- bounds ------------------------------------------------------------

    def _refresh_broken(self, v: int):
        if self._lower[v] > self._upper[v] + FEAS_TOL:
            self._broken.add(v)
        else:
            self._broken.discard(v)

    def _update_nonbasic_value(self, v: int, new: float):
        delta = new - self._value[v]
        if delta == 0.0:
            return
        self._value[v] = new
        for r in self._cols[v]:
            self._value[r] += self._rows[r][v] * delta

    def _assert_lower(self, v: int, b: float):
        if b <= self._lower[v]:
            return
        self._trail.append((v, self._lower[v], self._upper[v]))
        self._lower[v] = b
        self._refresh_broken(v)
        if v not in self._rows and self._value[v] < b and v not in self._broken:
            self._update_nonbasic_value(v, b)

    def _assert_upper(self, v: int, b: float):
        if b >= self._upper[v]:
            return
        self._trail.append((v, self._lower[v], self._upper[v]))
        self._upper[v] = b
        self._refresh_broken(v)
        if v not in self._rows and self._value[v] > b and v not in self._broken:
            self._update_nonbasic_value(v, b)

    def assert_raw(self, terms: Mapping[Hashable, float], relation: Relation, rhs: float):
        """Assert Σ terms ⋈ rhs over arbitrary hashable variable keys."""
        terms = {k: c for k, c in terms.items() if abs(c) > PIVOT_TOL}
        if not terms:
            # constant relation: either trivially true or poisons the context
            holds = {
                Relation.EQ: abs(rhs) <= FEAS_TOL,
                Relation.LE: rhs >= -FEAS_TOL,
                Relation.GE: rhs <= FEAS_TOL,
            }[relation]
            if not holds:
                v = self.var_index(("never", 0))
                self._assert_lower(v, 1.0)
                self._assert_upper(v, 0.0)
            return
        if len(terms) == 1:
            (k, c), = terms.items()
            v = self.var_index(k)
            bound = rhs / c
            flip = c < 0
        else:
            v = self._slack_for(terms)
            bound = rhs
            flip = False
        if relation is Relation.EQ:
            self._assert_lower(v, bound)
            self._assert_upper(v, bound)
        elif (relation is Relation.LE) != flip:
            self._assert_upper(v, bound)
        else:
            self._assert_lower(v, bound)

    # -- push / pop --------------------------------------------------------

    def push(self, atoms: Iterable[Atom]) -> ContextMark:
        mark = ContextMark(self._next_serial, len(self._trail))
        self._marks[mark.serial] = mark.trail_len
        self._next_serial += 1
        for a in atoms:
            self.assert_raw(a.lhs.terms, a.relation, -a.lhs.constant)
        return mark

    def pop(self, mark: ContextMark):
        if self._marks.get(mark.serial) != mark.trail_len:
            raise StaleMark(f"mark {mark.serial} was already popped")
        for serial in [s for s in self._marks if s >= mark.serial]:
            del self._marks[serial]
        while len(self._trail) > mark.trail_len:
            v, lo, hi = self._trail.pop()
            self._lower[v] = lo
            self._upper[v] = hi
            self._refresh_broken(v)

    def fingerprint(self) -> tuple:
        """Active finite bounds; structurally equal tableaus compare equal."""
        out = []
        for v in range(len(self._keys)):
            lo, hi = self._lower[v], self._upper[v]
            if lo != -math.inf or hi != math.inf:
                out.append((repr(self._keys[v]), lo, hi))
        return tuple(sorted(out))

    # -- pivoting ----------------------------------------------------------

    def _pivot(self, leaving: int, entering: int):
        row = self._rows.pop(leaving)
        for j in row:
            self._cols[j].discard(leaving)
        a = row.pop(entering)
        self._cols[entering].discard(leaving)
        new_row = {j: -c / a for j, c in row.items()}
        new_row[leaving] = 1.0 / a
        new_row = {j: c for j, c in new_row.items() if abs(c) > PIVOT_TOL}
        self._rows[entering] = new_row
        for j in new_row:
            self._cols[j].add(entering)
        # substitute the entering variable out of every other row
        for r in list(self._cols[entering]):
            if r == entering:
                continue
            other = self._rows[r]
            coeff = other.pop(entering)
            self._cols[entering].discard(r)
            for j, c in new_row.items():
                nv = other.get(j, 0.0) + coeff * c
                if abs(nv) > PIVOT_TOL:
                    other[j] = nv
                    self._cols[j].add(r)
                else:
                    other.pop(j, None)
                    self._cols[j].discard(r)

    def _pivot_and_update(self, basic: int, nonbasic: int, target: float):
        a = self._rows[basic][nonbasic]
        theta = (target - self._value[basic]) / a
        self._value[basic] = target
        self._value[nonbasic] += theta
        for r in self._cols[nonbasic]:
            if r != basic:
                self._value[r] += self._rows[r][nonbasic] * theta
        self._pivot(basic, nonbasic)

    # -- feasibility -------------------------------------------------------

    def check(self, witness: bool = True) -> LpResult:
        """Repair bound violations; Feasible with a witness, or Infeasible."""
        if self._broken:
            return LpResult(LpStatus.INFEASIBLE)
        for _ in range(PIVOT_CAP):
            basic = None
            target = 0.0
            need_increase = False
            for v in sorted(self._rows):
                if self._value[v] < self._lower[v] - FEAS_TOL:
                    basic, target, need_increase = v, self._lower[v], True
                    break
                if self._value[v] > self._upper[v] + FEAS_TOL:
                    basic, target, need_increase = v, self._upper[v], False
                    break
            if basic is None:
                return LpResult(
                    LpStatus.FEASIBLE, self.assignment() if witness else {}
                )
            row = self._rows[basic]
            entering = None
            for j in sorted(row):
                a = row[j]
                if need_increase:
                    ok = (a > PIVOT_TOL and self._value[j] < self._upper[j] - FEAS_TOL) or (
                        a < -PIVOT_TOL and self._value[j] > self._lower[j] + FEAS_TOL
                    )
                else:
                    ok = (a < -PIVOT_TOL and self._value[j] < self._upper[j] - FEAS_TOL) or (
                        a > PIVOT_TOL and self._value[j] > self._lower[j] + FEAS_TOL
                    )
                if ok:
                    entering = j
                    break
            if entering is None:
                return LpResult(LpStatus.INFEASIBLE)
            self._pivot_and_update(basic, entering, target)
        raise PivotCapExceeded("feasibility repair exceeded the pivot cap")

    # -- optimization ------------------------------------------------------

    def optimize(
        self,
        objective: Union[LinExpr, Mapping[Hashable, float]],
        direction: str = "max",
        witness: bool = True,
    ) -> LpResult:
        """Optimize a linear objective over the current context.

        Returns Optimal with a witness, or Unbounded; raises
        CalledOnInfeasibleContext when the context has no feasible point.
        """
        if isinstance(objective, LinExpr):
            const = objective.constant
            coeffs: dict[Hashable, float] = dict(objective.terms)
        else:
            const = 0.0
            coeffs = dict(objective)
        sign = 1.0 if direction == "max" else -1.0
        base = self.check(witness=False)
        if not base.feasible:
            raise CalledOnInfeasibleContext()
        for _ in range(PIVOT_CAP):
            reduced: dict[int, float] = {}
            for k, c in coeffs.items():
                v = self.var_index(k)
                c *= sign
                if v in self._rows:
                    for j, a in self._rows[v].items():
                        reduced[j] = reduced.get(j, 0.0) + c * a
                else:
                    reduced[v] = reduced.get(v, 0.0) + c
            entering = None
            up = False
            for j in sorted(reduced):
                d = reduced[j]
                if d > PIVOT_TOL and self._value[j] < self._upper[j] - FEAS_TOL:
                    entering, up = j, True
                    break
                if d < -PIVOT_TOL and self._value[j] > self._lower[j] + FEAS_TOL:
                    entering, up = j, False
                    break
            if entering is None:
                value = const + sum(
                    c * self._value[self.var_index(k)] for k, c in coeffs.items()
                )
                return LpResult(
                    LpStatus.OPTIMAL, self.assignment() if witness else {}, value
                )
            direction_step = 1.0 if up else -1.0
            limit = (
                self._upper[entering] - self._value[entering]
                if up
                else self._value[entering] - self._lower[entering]
            )
            leaving = None
            leave_target = 0.0
            for r in sorted(self._cols[entering]):
                a = self._rows[r][entering] * direction_step
                if a > PIVOT_TOL:
                    room = self._upper[r] - self._value[r]
                    bound = self._upper[r]
                else:
                    room = self._value[r] - self._lower[r]
                    bound = self._lower[r]
                t = max(room, 0.0) / abs(a)
                if t < limit - FEAS_TOL:
                    limit, leaving, leave_target = t, r, bound
            if limit == math.inf:
                return LpResult(LpStatus.UNBOUNDED)
            if leaving is None:
                self._update_nonbasic_value(
                    entering, self._value[entering] + direction_step * limit
                )
            else:
                step = direction_step * limit
                self._value[entering] += step
                for r in self._cols[entering]:
                    self._value[r] += self._rows[r][entering] * step
                self._pivot(leaving, entering)
        raise PivotCapExceeded("optimization exceeded the pivot cap")

    # -- results -----------------------------------------------------------

    def assignment(self) -> dict[VarId, float]:
        return {
            k: self._value[i]
            for i, k in enumerate(self._keys)
            if isinstance(k, VarId)
        }

    def value_of(self, key: Hashable) -> float:
        return self._value[self.var_index(key)]
