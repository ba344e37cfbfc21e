"""Weighted-max solver over hard/soft/OR clauses.

Maximizes the total weight of satisfied soft clauses subject to all hard
clauses by depth-first search over disjunct choices in declaration order,
pruning with an admissible bound backed by the incremental simplex. The
first solution found at the optimal weight is therefore the lexicographically
first Boolean skeleton by (clause order, disjunct order), which is the
declared tie-break. `brute_force_solve` is the exhaustive oracle.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

from . import lp
from .model import (
    And,
    Atom,
    Clause,
    DuplicateLabel,
    LayoutProblem,
    Or,
    Relation,
    Solution,
    UnboundVariable,
    VarId,
    box_clause,
    eval_formula,
    formula_atoms,
    nnf,
    pref_clauses,
)

WEIGHT_TOL = 1e-9

class HardInfeasible(Exception):
    """The hard clauses alone are unsatisfiable."""

    def __init__(self, labels: Sequence[str]):
        super().__init__(f"hard clauses infeasible; involved: {sorted(labels)}")
        self.labels = list(labels)


class CalledOnFeasibleProblem(Exception):
    pass


class TooLargeForOracle(Exception):
    pass


class UnknownLabelInRemove(Exception):
    pass


@dataclass
class WarmStart:
    """Previous-solution hints; affect search speed, never the optimum.

    `tableau` carries the previous solve's simplex rows (with all bounds
    popped); reusing them spares rebuilding slack rows for unchanged atoms.
    """

    branch_choices: dict[str, int] = field(default_factory=dict)
    assignment_hint: dict[VarId, float] = field(default_factory=dict)
    tableau: Optional[lp.Tableau] = None


@lru_cache(maxsize=8192)
def _cached_nnf(formula, epsilon: float):
    return nnf(formula, epsilon)


@dataclass
class EditBatch:
    """A set of edits applied to a problem before incremental re-solving."""

    remove: list[str] = field(default_factory=list)
    add: list[Clause] = field(default_factory=list)
    widget_changes: list[tuple] = field(default_factory=list)  # ("add", Widget) etc.
    viewport: Optional[tuple[float, float]] = None


class _Timeout(Exception):
    pass


def _must_atoms(f) -> list[Atom]:
    """Atoms that hold whenever the NNF formula holds (Or subtrees skipped)."""
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, And):
        out = []
        for c in f.children:
            out.extend(_must_atoms(c))
        return out
    return []


def _count_or_nodes(f) -> int:
    if isinstance(f, Atom):
        return 0
    n = 1 if isinstance(f, Or) else 0
    return n + sum(_count_or_nodes(c) for c in f.children)


def _satisfying_choices(f):
    """Yield atom lists, one per way of satisfying the NNF formula, in
    declaration order."""
    if isinstance(f, Atom):
        yield [f]
        return
    if isinstance(f, Or):
        for child in f.children:
            yield from _satisfying_choices(child)
        return
    # And: cartesian product of children, rightmost varying fastest
    def product(i):
        if i == len(f.children):
            yield []
            return
        for head in _satisfying_choices(f.children[i]):
            for tail in product(i + 1):
                yield head + tail

    yield from product(0)


def _finalize(problem: LayoutProblem, committed: list[Atom]) -> Optional[dict[VarId, float]]:
    """Canonical final LP: re-push the chosen skeleton in declaration order
    and minimize Σ |size − pref| via split slacks. Returns None only when the
    rebuild is numerically infeasible (the caller treats that as a dead
    skeleton)."""
    tab = lp.Tableau()
    tab.push(committed)
    if not tab.check().feasible:
        return None
    objective: dict = {}
    for w in problem.widgets:
        for axis, attr in ((0, "width"), (1, "height")):
            pos = ("dev+", w.id, attr)
            neg = ("dev-", w.id, attr)
            tab.assert_raw({pos: 1.0}, Relation.GE, 0.0)
            tab.assert_raw({neg: 1.0}, Relation.GE, 0.0)
            tab.assert_raw(
                {VarId(w.id, attr): 1.0, pos: -1.0, neg: 1.0},
                Relation.EQ,
                w.pref[axis],
            )
            objective[pos] = 1.0
            objective[neg] = 1.0
    if objective:
        result = tab.optimize(objective, "min")
        if result.status is lp.LpStatus.UNBOUNDED:  # pragma: no cover - guarded by >=0
            return None
        assignment = result.assignment
    else:
        assignment = tab.check().assignment
    for v in problem.variables():
        assignment.setdefault(v, 0.0)
    return assignment


class _Search:
    """One solve run: shared tableau, clause bookkeeping, incumbent."""

    def __init__(self, problem: LayoutProblem, budget: Optional[float], warm: Optional[WarmStart]):
        self.problem = problem
        self.warm = warm
        self.deadline = None if budget is None else time.monotonic() + budget
        self.timed_out = False
        eps = problem.epsilon
        self.nnfs = {c.label: _cached_nnf(c.formula, eps) for c in problem.clauses}
        self.base_atoms: list[Atom] = []
        self.branching: list[Clause] = []
        for c in problem.clauses:
            f = self.nnfs[c.label]
            if c.is_hard and _count_or_nodes(f) == 0:
                self.base_atoms.extend(_must_atoms(f))
            else:
                self.branching.append(c)
        self.total_weight = sum(c.weight for c in self.branching if not c.is_hard)
        self.tab = lp.Tableau()
        if warm is not None and warm.tableau is not None:
            self.tab = warm.tableau
        self.root_mark: Optional[lp.ContextMark] = None
        # incumbent: finalized lazily once the search ends
        self.best_weight = -1.0
        self.best_skeleton: Optional[tuple] = None  # (weight, choices, atoms, witness)
        self.found_lex = False
        # per-branching-clause status: 0 pending, 1 satisfied, 2 falsified
        self.status = [0] * len(self.branching)
        self.falsified = 0.0
        self.choices: dict[str, int] = {}
        self.committed: list[Atom] = []
        self.groups: list[tuple[tuple[int, ...], tuple[float, ...]]] = []

    # -- setup -------------------------------------------------------------

    def prepare(self) -> None:
        self.root_mark = self.tab.push(self.base_atoms)
        if not self.tab.check(witness=False).feasible:
            self.release()
            raise HardInfeasible(_filter_conflict(self.problem))
        self._verify_groups()

    def release(self) -> None:
        """Pop back to the empty-bound state, keeping rows for reuse."""
        if self.root_mark is not None:
            self.tab.pop(self.root_mark)
            self.root_mark = None

    def _verify_groups(self) -> None:
        by_tag: dict[str, list[int]] = {}
        for i, c in enumerate(self.branching):
            if c.group and not c.is_hard:
                by_tag.setdefault(c.group, []).append(i)
        cache_key = (
            tuple(self.base_atoms),
            tuple(
                (c.label, c.group, c.formula)
                for c in self.branching
                if c.group and not c.is_hard
            ),
        )
        cached = getattr(self.tab, "_orc_verified_groups", None)
        if cached is not None and cached[0] == cache_key:
            verified_tags = cached[1]
        else:
            verified_tags = set()
            for tag, members in by_tag.items():
                if len(members) < 2:
                    continue
                ok = True
                for a in range(len(members)):
                    for b in range(a + 1, len(members)):
                        atoms = _must_atoms(
                            self.nnfs[self.branching[members[a]].label]
                        ) + _must_atoms(self.nnfs[self.branching[members[b]].label])
                        if not atoms:
                            ok = False
                            break
                        mark = self.tab.push(atoms)
                        feasible = self.tab.check(witness=False).feasible
                        self.tab.pop(mark)
                        if feasible:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    verified_tags.add(tag)
            self.tab._orc_verified_groups = (cache_key, verified_tags)
        for tag, members in by_tag.items():
            if tag not in verified_tags:
                continue
            idxs = tuple(members)
            self.groups.append((idxs, tuple(self.branching[i].weight for i in idxs)))

    # -- bound ---------------------------------------------------------------

    def bound(self) -> float:
        penalty = 0.0
        for idxs, weights in self.groups:
            pending = [w for i, w in zip(idxs, weights) if self.status[i] == 0]
            if not pending:
                continue
            if any(self.status[i] == 1 for i in idxs):
                penalty += sum(pending)
            else:
                penalty += sum(pending) - max(pending)
        return self.total_weight - self.falsified - penalty

    def _prunable(self) -> bool:
        b = self.bound()
        if b < self.best_weight - WEIGHT_TOL:
            return True
        return self.found_lex and b <= self.best_weight + WEIGHT_TOL

    # -- search --------------------------------------------------------------

    def run(self) -> Solution:
        start = time.monotonic()
        sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
        try:
            if self.warm is not None and (
                self.warm.branch_choices or self.warm.assignment_hint
            ):
                self._dive()
            self._explore(0)
        except _Timeout:
            self.timed_out = True
        if self.best_skeleton is None:
            if self.timed_out:
                raise TimeoutError("budget exhausted before any solution was found")
            raise HardInfeasible(_filter_conflict(self.problem))
        weight, choices, committed, witness = self.best_skeleton
        assignment = _finalize(self.problem, list(committed))
        if assignment is None:  # numeric edge; the search witness is feasible
            assignment = dict(witness)
            for v in self.problem.variables():
                assignment.setdefault(v, 0.0)
        return Solution(
            assignment=assignment,
            satisfied_weight=weight,
            total_soft_weight=self.total_weight,
            branch_choices=choices,
            optimal=not self.timed_out,
            solve_time=time.monotonic() - start,
        )

    def _tick(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout()

    def _explore(self, i: int) -> None:
        self._tick()
        if self._prunable():
            return
        if i == len(self.branching):
            self._complete()
            return
        clause = self.branching[i]
        f = self.nnfs[clause.label]
        cont = lambda: self._explore(i + 1)  # noqa: E731
        try:
            if clause.is_hard:
                self.status[i] = 1
                self._sat_root(clause, f, cont)
                return
            # soft: satisfy first, then pay the weight
            self.status[i] = 1
            self._sat_root(clause, f, cont)
            self.status[i] = 2
            self.falsified += clause.weight
            try:
                if not self._prunable():
                    self._explore(i + 1)
            finally:
                self.falsified -= clause.weight
        finally:
            self.status[i] = 0

    def _sat_root(self, clause: Clause, f, cont) -> None:
        if isinstance(f, Or):
            explored_atoms: list[Atom] = []
            for orig_idx, child in enumerate(f.children):
                if self._dominated(child, explored_atoms):
                    continue
                self.choices[clause.label] = orig_idx + 1
                try:
                    self._sat(child, cont)
                finally:
                    del self.choices[clause.label]
                if isinstance(child, Atom):
                    explored_atoms.append(child)
        else:
            self._sat(f, cont)

    def _dominated(self, child, explored_atoms: list[Atom]) -> bool:
        """True when `child` is a single atom whose region is contained in an
        already-explored single-atom sibling's region; every completion below
        it then exists below the earlier (lex-first) sibling with equal
        weight, so skipping it changes neither the optimum nor the tie-break."""
        if not isinstance(child, Atom) or not explored_atoms:
            return False
        mark = self.tab.push([child])
        try:
            if not self.tab.check(witness=False).feasible:
                return False  # the normal branch path rejects it cheaply anyway
            # the current witness must satisfy an atom for it to be entailed;
            # that cheap filter keeps the exact check off most siblings
            candidates = [e for e in explored_atoms if self._holds_at_witness(e)]
            return any(self._implied(e) for e in candidates[:2])
        finally:
            self.tab.pop(mark)

    def _holds_at_witness(self, atom: Atom) -> bool:
        value = atom.lhs.constant
        for var, coeff in atom.lhs.terms.items():
            value += coeff * self.tab.value_of(var)
        if atom.relation is Relation.EQ:
            return abs(value) <= lp.FEAS_TOL
        if atom.relation is Relation.LE:
            return value <= lp.FEAS_TOL
        return value >= -lp.FEAS_TOL

    def _implied(self, atom: Atom) -> bool:
        """Exact entailment of a non-strict atom by the current context."""
        expr = atom.lhs
        rel = atom.relation
        if rel in (Relation.LE, Relation.EQ):
            hi = self.tab.optimize(expr, "max", witness=False)
            if hi.status is not lp.LpStatus.OPTIMAL or hi.value > lp.FEAS_TOL:
                return False
        if rel in (Relation.GE, Relation.EQ):
            lo = self.tab.optimize(expr, "min", witness=False)
            if lo.status is not lp.LpStatus.OPTIMAL or lo.value < -lp.FEAS_TOL:
                return False
        return True

    def _sat(self, f, k) -> None:
        """Commit the NNF formula `f`, then continue with `k`."""
        self._tick()
        if isinstance(f, Atom):
            atoms, ors = [f], []
        elif isinstance(f, And):
            atoms = [c for c in f.children if isinstance(c, Atom)]
            ors = [c for c in f.children if not isinstance(c, Atom)]
        else:  # Or node nested below an And
            atoms, ors = [], [f]
        mark = self.tab.push(atoms)
        self.committed.extend(atoms)
        try:
            if atoms and not self.tab.check(witness=False).feasible:
                return
            self._sat_ors(ors, 0, k)
        finally:
            if atoms:
                del self.committed[-len(atoms):]
            self.tab.pop(mark)

    def _sat_ors(self, ors: list, j: int, k) -> None:
        if j == len(ors):
            k()
            return
        node = ors[j]
        explored_atoms: list[Atom] = []
        for child in node.children:
            if self._dominated(child, explored_atoms):
                continue
            self._sat(child, lambda: self._sat_ors(ors, j + 1, k))
            if isinstance(child, Atom):
                explored_atoms.append(child)

    def _complete(self) -> None:
        weight = sum(
            c.weight for i, c in enumerate(self.branching) if self.status[i] == 1 and not c.is_hard
        )
        improves = weight > self.best_weight + WEIGHT_TOL
        ties_first = (
            not self.found_lex and abs(weight - self.best_weight) <= WEIGHT_TOL
        )
        if not (improves or ties_first or self.best_skeleton is None):
            return
        self.best_skeleton = (
            weight,
            dict(self.choices),
            tuple(self.base_atoms + self.committed),
            self.tab.assignment(),
        )
        self.best_weight = max(self.best_weight, weight)
        self.found_lex = True

    # -- warm-start replay -----------------------------------------------------

    def _dive(self) -> None:
        """Replay the previous solution as a single LP-verified path.

        Seeds the incumbent weight for pruning; found_lex stays False so
        equal-weight skeletons are still searched in lexicographic order and
        the warm start can never change the reported optimum."""
        hint = self.warm.assignment_hint if self.warm else {}

        def eval_hint(f) -> bool:
            try:
                return eval_formula(f, hint)
            except UnboundVariable:
                return False

        def chosen_atoms(f) -> Optional[list[Atom]]:
            """Atoms of the hint-chosen branch of an NNF formula, or None."""
            if isinstance(f, Atom):
                return [f] if eval_hint(f) else None
            if isinstance(f, And):
                out: list[Atom] = []
                for c in f.children:
                    sub = chosen_atoms(c)
                    if sub is None:
                        return None
                    out.extend(sub)
                return out
            for di, c in enumerate(f.children):
                sub = chosen_atoms(c)
                if sub is not None:
                    return sub
            return None

        mark = self.tab.push([])
        replayed = 0
        try:
            for i, clause in enumerate(self.branching):
                self._tick()
                f = self.nnfs[clause.label]
                atoms = chosen_atoms(f)
                if atoms is None:
                    if clause.is_hard:
                        return  # previous layout no longer satisfies this clause
                    self.status[i] = 2
                    self.falsified += clause.weight
                    replayed += 1
                    continue
                self.tab.push(atoms)
                self.committed.extend(atoms)
                if isinstance(f, Or):
                    for di, c in enumerate(f.children):
                        if chosen_atoms(c) is not None:
                            self.choices[clause.label] = di + 1
                            break
                self.status[i] = 1
                replayed += 1
            # one feasibility check for the whole replayed path
            if self.tab.check(witness=False).feasible:
                self._complete()
        finally:
            for i in range(replayed):
                if self.status[i] == 2:
                    self.falsified -= self.branching[i].weight
                self.status[i] = 0
            self.committed.clear()
            self.choices.clear()
            self.tab.pop(mark)
            self.found_lex = False


def solve(
    problem: LayoutProblem,
    budget: Optional[float] = None,
    warm: Optional[WarmStart] = None,
) -> Solution:
    """Maximize satisfied soft weight subject to all hard clauses.

    `budget` is wall-clock seconds; when exhausted the best incumbent is
    returned with optimal=False. Raises HardInfeasible when the hard clauses
    alone cannot be satisfied.
    """
    search = _Search(problem, budget, warm)
    search.prepare()
    try:
        return search.run()
    finally:
        search.release()


def brute_force_solve(problem: LayoutProblem) -> Solution:
    """Exact optimum by exhaustive enumeration of disjunct selections and
    soft-clause subsets, each checked through the LP. Testing oracle."""
    eps = problem.epsilon
    nnfs = [nnf(c.formula, eps) for c in problem.clauses]
    n_disjunctive = sum(1 for f in nnfs if _count_or_nodes(f) > 0)
    n_soft = sum(1 for c in problem.clauses if not c.is_hard)
    if n_disjunctive > 20 or n_soft > 16:
        raise TooLargeForOracle(
            f"{n_disjunctive} disjunctive clauses, {n_soft} soft clauses"
        )
    total = sum(c.weight for c in problem.clauses if not c.is_hard)
    tab = lp.Tableau()
    best: dict = {"weight": -1.0, "solution": None}
    clauses = problem.clauses

    falsified_labels: set[str] = set()

    def options(i: int):
        c = clauses[i]
        f = nnfs[i]
        if isinstance(f, Or):
            for di, child in enumerate(f.children):
                for atoms in _satisfying_choices(child):
                    yield ("sat", di + 1, atoms)
        else:
            for atoms in _satisfying_choices(f):
                yield ("sat", None, atoms)
        if not c.is_hard:
            yield ("fals", None, None)

    def complete(choices: dict[str, int], committed: list[Atom]):
        weight = sum(
            c.weight for c in clauses if not c.is_hard and c.label not in falsified_labels
        )
        if best["solution"] is not None and weight <= best["weight"] + WEIGHT_TOL:
            return
        assignment = _finalize(problem, committed)
        if assignment is None:
            return
        best["weight"] = weight
        best["solution"] = Solution(
            assignment=assignment,
            satisfied_weight=weight,
            total_soft_weight=total,
            branch_choices=dict(choices),
            optimal=True,
        )

    def go(i: int, falsified: float, choices: dict[str, int], committed: list[Atom]):
        if falsified > total - best["weight"] + WEIGHT_TOL:
            return
        if best["solution"] is not None and falsified >= total - best["weight"] - WEIGHT_TOL:
            return
        if i == len(clauses):
            complete(choices, committed)
            return
        c = clauses[i]
        for kind, di, atoms in options(i):
            if kind == "fals":
                falsified_labels.add(c.label)
                go(i + 1, falsified + c.weight, choices, committed)
                falsified_labels.discard(c.label)
            else:
                mark = tab.push(atoms)
                if tab.check(witness=False).feasible:
                    if di is not None:
                        choices[c.label] = di
                    go(i + 1, falsified, choices, committed + atoms)
                    if di is not None:
                        choices.pop(c.label, None)
                tab.pop(mark)

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    go(0, 0.0, {}, [])
    if best["solution"] is None:
        raise HardInfeasible(_filter_conflict(problem))
    return best["solution"]


def _hard_feasible(problem: LayoutProblem, labels: Optional[set[str]] = None) -> bool:
    """First-success search over the hard clauses (optionally a subset)."""
    eps = problem.epsilon
    clauses = [
        c
        for c in problem.clauses
        if c.is_hard and (labels is None or c.label in labels)
    ]
    nnfs = [nnf(c.formula, eps) for c in clauses]
    tab = lp.Tableau()

    class _Found(Exception):
        pass

    def go(i: int):
        if i == len(clauses):
            raise _Found()
        for atoms in _satisfying_choices(nnfs[i]):
            mark = tab.push(atoms)
            if tab.check(witness=False).feasible:
                go(i + 1)
            tab.pop(mark)

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    try:
        go(0)
    except _Found:
        return True
    return not clauses


def _filter_conflict(problem: LayoutProblem) -> list[str]:
    """Deletion filtering: drop hard labels whose removal keeps infeasibility."""
    labels = [c.label for c in problem.clauses if c.is_hard]
    active = set(labels)
    for lbl in labels:
        trial = active - {lbl}
        if trial and not _hard_feasible(problem, trial):
            active = trial
    return [l for l in labels if l in active]


def explain_infeasible(problem: LayoutProblem) -> list[str]:
    """A non-trivial set of hard clause labels whose conjunction is
    infeasible, found by deletion filtering."""
    if _hard_feasible(problem):
        raise CalledOnFeasibleProblem()
    return _filter_conflict(problem)


AUTO_PREFIXES = ("box:", "pref_w:", "pref_h:")


def _is_auto(label: str) -> bool:
    return label.startswith(AUTO_PREFIXES)


def apply_edit_batch(problem: LayoutProblem, edits: EditBatch) -> LayoutProblem:
    """Apply an EditBatch, regenerating auto clauses as widgets and the
    viewport change. Clause order stays canonical: per-widget auto clauses in
    widget order, then surviving user clauses, then additions."""
    labels = {c.label for c in problem.clauses}
    for lbl in edits.remove:
        if lbl not in labels:
            raise UnknownLabelInRemove(lbl)
    removed = set(edits.remove)
    widgets = list(problem.widgets)
    dropped_widgets: set[str] = set()
    for change in edits.widget_changes:
        kind, payload = change
        if kind == "add":
            widgets.append(payload)
        elif kind == "remove":
            widgets = [w for w in widgets if w.id != payload]
            dropped_widgets.add(payload)
        elif kind == "retarget":
            widgets = [payload if w.id == payload.id else w for w in widgets]
        else:
            raise ValueError(f"unknown widget change {kind!r}")
    viewport = edits.viewport if edits.viewport is not None else problem.viewport
    kept_ids = {w.id for w in widgets}

    def mentions_dropped(c: Clause) -> bool:
        for a in formula_atoms(c.formula):
            for v in a.lhs.terms:
                if v.widget not in kept_ids:
                    return True
        return False

    user: list[Clause] = []
    had_box: set[str] = set()
    had_pref: set[str] = set()
    for c in problem.clauses:
        if _is_auto(c.label):
            wid = c.label.split(":", 1)[1]
            if c.label.startswith("box:"):
                had_box.add(wid)
            else:
                had_pref.add(wid)
            continue
        if c.label in removed or mentions_dropped(c):
            continue
        user.append(c)
    for c in edits.add:
        if mentions_dropped(c):
            raise ValueError(f"added clause {c.label!r} references an unknown widget")
        user.append(c)
    new_ids = {
        payload.id for kind, payload in edits.widget_changes if kind == "add"
    }
    auto: list[Clause] = []
    for w in widgets:
        if w.id in had_box or w.id in new_ids:
            auto.append(box_clause(w, viewport))
        if w.id in had_pref or w.id in new_ids:
            auto.extend(pref_clauses(w))
    out = auto + user
    seen: set[str] = set()
    for c in out:
        if c.label in seen:
            raise DuplicateLabel(c.label)
        seen.add(c.label)
    return LayoutProblem(tuple(widgets), viewport, tuple(out), problem.epsilon)


def resolve_incremental(
    problem: LayoutProblem,
    prev: Optional[Solution],
    edits: EditBatch,
    budget: Optional[float] = None,
    tableau: Optional[lp.Tableau] = None,
) -> tuple[LayoutProblem, Solution]:
    """Re-solve after edits, warm-started from the previous solution.

    The warm start seeds branch ordering, the incumbent bound, and (when a
    session tableau is supplied) the simplex rows; all of it affects speed
    only — the reported optimum is identical to a from-scratch solve of the
    edited problem."""
    edited = apply_edit_batch(problem, edits)
    warm = None
    if prev is not None or tableau is not None:
        warm = WarmStart(
            dict(prev.branch_choices) if prev else {},
            dict(prev.assignment) if prev else {},
            tableau,
        )
    return edited, solve(edited, budget=budget, warm=warm)
