import itertools
import random

import pytest

from orclayout.lp import (
    CalledOnInfeasibleContext,
    LpStatus,
    StaleMark,
    Tableau,
    FEAS_TOL,
)
from orclayout.model import Atom, LinExpr, Relation, VarId, eq, ge, le

X = VarId("w", "left")
Y = VarId("w", "top")
Z = VarId("w", "width")
x, y, z = (LinExpr.var(v) for v in (X, Y, Z))


def feasible(atoms):
    tab = Tableau()
    tab.push(atoms)
    return tab.check()


def test_pinned_variable():
    res = feasible([ge(x, 0), le(x, 0)])
    assert res.status is LpStatus.FEASIBLE
    assert abs(res.assignment[X]) <= FEAS_TOL


def test_contradictory_bounds():
    assert feasible([ge(x, 1), le(x, 0)]).status is LpStatus.INFEASIBLE


def test_multi_term_witness():
    res = feasible([eq(x + y, 4), ge(x, 0), ge(y, 0), le(x, 1)])
    assert res.status is LpStatus.FEASIBLE
    ax, ay = res.assignment[X], res.assignment[Y]
    assert 0 - FEAS_TOL <= ax <= 1 + FEAS_TOL
    assert abs(ax + ay - 4) <= FEAS_TOL


def test_optimize_at_bound():
    tab = Tableau()
    tab.push([ge(x, 0)])
    res = tab.optimize(x, "min")
    assert res.status is LpStatus.OPTIMAL
    assert abs(res.value) <= 1e-6


def test_optimize_vertex():
    # maximize x + y subject to 2x + y <= 4, x,y >= 0: optimum 4 at (0,4)
    tab = Tableau()
    tab.push([le(2 * x + y, 4), ge(x, 0), ge(y, 0)])
    res = tab.optimize(x + y, "max")
    assert res.status is LpStatus.OPTIMAL
    assert abs(res.value - 4.0) <= 1e-6


def test_optimize_unbounded():
    tab = Tableau()
    tab.push([ge(x, 0)])
    assert tab.optimize(x, "max").status is LpStatus.UNBOUNDED


def test_optimize_on_infeasible_raises():
    tab = Tableau()
    tab.push([ge(x, 1), le(x, 0)])
    with pytest.raises(CalledOnInfeasibleContext):
        tab.optimize(x, "max")


def test_push_pop_restores_structure_and_behavior():
    tab = Tableau()
    tab.push([ge(x, 0), ge(y, 0), le(x + y, 10)])
    before_fp = tab.fingerprint()
    before = tab.check().status
    mark = tab.push([ge(x, 20)])
    assert tab.check().status is LpStatus.INFEASIBLE
    tab.pop(mark)
    assert tab.fingerprint() == before_fp
    assert tab.check().status is before


def test_nested_push_pop():
    tab = Tableau()
    tab.push([ge(x, 0)])
    m1 = tab.push([le(x, 5)])
    m2 = tab.push([ge(x, 7)])
    assert tab.check().status is LpStatus.INFEASIBLE
    tab.pop(m2)
    assert tab.check().status is LpStatus.FEASIBLE
    tab.pop(m1)
    res = tab.optimize(x, "max")
    assert res.status is LpStatus.UNBOUNDED


def test_pop_outer_mark_pops_inner_too():
    tab = Tableau()
    m1 = tab.push([le(x, 5)])
    m2 = tab.push([ge(x, 7)])
    tab.pop(m1)
    with pytest.raises(StaleMark):
        tab.pop(m2)


def test_stale_mark():
    tab = Tableau()
    m = tab.push([le(x, 5)])
    tab.pop(m)
    with pytest.raises(StaleMark):
        tab.pop(m)


def test_empty_push_is_noop():
    tab = Tableau()
    tab.push([ge(x, 0)])
    fp = tab.fingerprint()
    m = tab.push([])
    assert tab.fingerprint() == fp
    tab.pop(m)
    assert tab.fingerprint() == fp


def test_lazy_infeasibility_detection():
    tab = Tableau()
    tab.push([le(x, 0)])
    m = tab.push([ge(x, 1)])
    assert isinstance(m.serial, int)
    assert tab.check().status is LpStatus.INFEASIBLE


def test_equality_atom_pins_slack():
    res = feasible([eq(2 * x - y, 6), eq(x, 4)])
    assert res.status is LpStatus.FEASIBLE
    assert abs(res.assignment[Y] - 2.0) <= 1e-6


def test_determinism_identical_push_sequences():
    def run():
        tab = Tableau()
        tab.push([le(x + y, 10), ge(x, 0), ge(y, 0), le(x - y, 2)])
        tab.check()
        tab.push([ge(x + 2 * y, 3)])
        return tab.check().assignment

    a, b = run(), run()
    assert a == b


def test_soundness_witness_satisfies_all_atoms():
    rng = random.Random(7)
    vars_ = [VarId("w", a) for a in ("left", "top", "width", "height")]
    for _ in range(50):
        atoms = []
        for _ in range(rng.randint(1, 8)):
            terms = {
                v: rng.choice([-2, -1, 1, 2])
                for v in rng.sample(vars_, rng.randint(1, 3))
            }
            rel = rng.choice([Relation.LE, Relation.GE, Relation.EQ])
            atoms.append(Atom(LinExpr(terms, rng.randint(-10, 10)), rel))
        res = feasible(atoms)
        if res.feasible:
            assignment = dict(res.assignment)
            for v in vars_:
                assignment.setdefault(v, 0.0)
            for a in atoms:
                value = a.lhs.evaluate(assignment)
                if a.relation is Relation.EQ:
                    assert abs(value) <= 1e-6
                elif a.relation is Relation.LE:
                    assert value <= 1e-6
                else:
                    assert value >= -1e-6


# -- independent feasibility oracles ----------------------------------------


def vertex_enumeration_feasible(atoms, var_order, box=1e6):
    """Check feasibility by enumerating basic points of the atom set plus a
    large bounding box, testing each candidate against every constraint."""
    import numpy as np

    n = len(var_order)
    rows = []  # (coeffs, rhs, relation)
    for a in atoms:
        coeffs = [a.lhs.terms.get(v, 0.0) for v in var_order]
        rows.append((coeffs, -a.lhs.constant, a.relation))
    for i, v in enumerate(var_order):
        unit = [0.0] * n
        unit[i] = 1.0
        rows.append((unit, box, Relation.LE))
        rows.append((unit, -box, Relation.GE))

    def satisfies(point):
        for coeffs, rhs, rel in rows:
            lhs = sum(c * p for c, p in zip(coeffs, point))
            if rel is Relation.EQ and abs(lhs - rhs) > 1e-6:
                return False
            if rel is Relation.LE and lhs > rhs + 1e-6:
                return False
            if rel is Relation.GE and lhs < rhs - 1e-6:
                return False
        return True

    for combo in itertools.combinations(range(len(rows)), n):
        A = np.array([rows[i][0] for i in combo], dtype=float)
        b = np.array([rows[i][1] for i in combo], dtype=float)
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        point = np.linalg.solve(A, b)
        if satisfies(point):
            return True
    return False


def random_system(rng, n_vars, n_atoms):
    vars_ = [VarId("w", a) for a in ("left", "top", "width", "height")][:n_vars]
    atoms = []
    for _ in range(n_atoms):
        size = rng.randint(1, min(2, n_vars))
        terms = {v: float(rng.choice([-3, -2, -1, 1, 2, 3])) for v in rng.sample(vars_, size)}
        rel = rng.choice([Relation.LE, Relation.GE, Relation.LE, Relation.GE, Relation.EQ])
        atoms.append(Atom(LinExpr(terms, float(rng.randint(-8, 8))), rel))
    return vars_, atoms


def test_completeness_against_vertex_enumeration():
    rng = random.Random(2024)
    for _ in range(60):
        vars_, atoms = random_system(rng, rng.randint(2, 4), rng.randint(2, 8))
        expected = vertex_enumeration_feasible(atoms, vars_)
        got = feasible(atoms).feasible
        assert got == expected


def test_completeness_against_scipy_at_desk_scale():
    # rational pixel-scale systems up to 12 vars / 30 atoms vs HiGHS
    import numpy as np
    from scipy.optimize import linprog

    rng = random.Random(11)
    widgets = ["a", "b", "c"]
    vars_ = [VarId(w, a) for w in widgets for a in ("left", "top", "width", "height")]
    for _ in range(40):
        n_vars = rng.randint(4, 12)
        pool = vars_[:n_vars]
        atoms = []
        for _ in range(rng.randint(4, 30)):
            size = rng.randint(1, 3)
            terms = {v: float(rng.choice([-2, -1, 1, 2])) for v in rng.sample(pool, size)}
            rel = rng.choice([Relation.LE, Relation.GE, Relation.EQ])
            atoms.append(Atom(LinExpr(terms, float(rng.randint(-10, 10))), rel))
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for a in atoms:
            coeffs = [a.lhs.terms.get(v, 0.0) for v in pool]
            rhs = -a.lhs.constant
            if a.relation is Relation.EQ:
                a_eq.append(coeffs)
                b_eq.append(rhs)
            elif a.relation is Relation.LE:
                a_ub.append(coeffs)
                b_ub.append(rhs)
            else:
                a_ub.append([-c for c in coeffs])
                b_ub.append(-rhs)
        res = linprog(
            c=np.zeros(len(pool)),
            A_ub=np.array(a_ub) if a_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(a_eq) if a_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=[(None, None)] * len(pool),
            method="highs",
        )
        expected = res.status == 0
        assert feasible(atoms).feasible == expected


def test_pivot_cap_is_an_error_never_silent(monkeypatch):
    import orclayout.lp as lp_mod

    monkeypatch.setattr(lp_mod, "PIVOT_CAP", 1)
    tab = Tableau()
    tab.push([eq(x + y, 4), eq(x - y, 2), ge(x, 3), le(x, 3), ge(z, 0), le(x + y + z, 10)])
    with pytest.raises(lp_mod.PivotCapExceeded):
        tab.check()
