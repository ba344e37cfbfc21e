import random

import pytest

from orclayout.model import (
    And,
    Atom,
    LayoutProblem,
    LinExpr,
    Or,
    Relation,
    VarId,
    Widget,
    eq,
    eval_formula,
    ge,
    hard,
    le,
    soft,
)
from orclayout.solver import (
    CalledOnFeasibleProblem,
    EditBatch,
    HardInfeasible,
    TooLargeForOracle,
    WarmStart,
    apply_edit_batch,
    brute_force_solve,
    explain_infeasible,
    resolve_incremental,
    solve,
)

X = VarId("w", "width")
Y = VarId("w", "height")
x = LinExpr.var(X)
y = LinExpr.var(Y)

PHANTOM = Widget("w", pref=(5.0, 5.0))


def problem(clauses, widgets=(PHANTOM,), viewport=(100, 100)):
    """Bare problem without auto clauses; solver-level tests drive the
    objective explicitly."""
    return LayoutProblem(tuple(widgets), viewport, tuple(clauses))


def test_hard_only_uses_pref_deviation():
    p = problem([hard("h1", ge(x, 0)), hard("h2", le(x, 10))])
    sol = solve(p)
    assert sol.optimal
    assert sol.satisfied_weight == 0.0
    assert abs(sol.assignment[X] - 5.0) <= 1e-6  # widget pref width


def test_weighted_conflict_prefers_heavier():
    p = problem(
        [
            hard("h1", ge(x, 0)),
            hard("h2", le(x, 10)),
            soft("s0", eq(x, 0), 2.0),
            soft("s5", eq(x, 5), 3.0),
        ]
    )
    sol = solve(p)
    assert sol.satisfied_weight == 3.0
    assert abs(sol.assignment[X] - 5.0) <= 1e-6
    oracle = brute_force_solve(p)
    assert oracle.satisfied_weight == 3.0


def test_disjunct_choice_recorded_one_based():
    p = problem(
        [
            hard("pick", Or((eq(x, 0), eq(x, 10)))),
            soft("pull", ge(x, 5), 1.0),
        ]
    )
    sol = solve(p)
    assert abs(sol.assignment[X] - 10.0) <= 1e-6
    assert sol.satisfied_weight == 1.0
    assert sol.branch_choices == {"pick": 2}


def test_hard_infeasible_names_labels():
    p = problem([hard("a", ge(x, 1)), hard("b", le(x, 0)), hard("c", ge(y, 0))])
    with pytest.raises(HardInfeasible) as err:
        solve(p)
    assert set(err.value.labels) == {"a", "b"}


def test_brute_force_empty_problem():
    p = problem([], widgets=())
    assert brute_force_solve(p).satisfied_weight == 0.0
    assert solve(p).satisfied_weight == 0.0


def test_brute_force_guard():
    clauses = [soft(f"s{i}", eq(x, i), 1.0) for i in range(17)]
    with pytest.raises(TooLargeForOracle):
        brute_force_solve(problem(clauses))


def test_explain_infeasible_excludes_unrelated():
    p = problem([hard("a", ge(x, 1)), hard("b", le(x, 0)), hard("c", ge(y, 0))])
    assert set(explain_infeasible(p)) == {"a", "b"}


def test_explain_single_contradiction():
    contradiction = And((ge(x, 1), le(x, 0)))
    p = problem([hard("only", contradiction), hard("fine", ge(y, 0))])
    assert explain_infeasible(p) == ["only"]


def test_explain_on_feasible_raises():
    p = problem([hard("a", ge(x, 0))])
    with pytest.raises(CalledOnFeasibleProblem):
        explain_infeasible(p)


def test_noop_edit_preserves_solution():
    p = problem(
        [
            hard("pick", Or((eq(x, 0), eq(x, 10)))),
            soft("pull", ge(x, 5), 1.0),
        ]
    )
    prev = solve(p)
    edited, sol = resolve_incremental(p, prev, EditBatch())
    assert sol.satisfied_weight == prev.satisfied_weight
    assert sol.branch_choices == prev.branch_choices
    assert sol.assignment == prev.assignment


def test_delete_only_widget_empties_solution():
    p = problem([soft("s", eq(x, 5), 2.0)])
    prev = solve(p)
    edited, sol = resolve_incremental(p, prev, EditBatch(widget_changes=[("remove", "w")]))
    assert edited.widgets == ()
    assert sol.satisfied_weight == 0.0
    assert sol.assignment == {}


def test_remove_unknown_label_rejected():
    from orclayout.solver import UnknownLabelInRemove

    p = problem([hard("a", ge(x, 0))])
    with pytest.raises(UnknownLabelInRemove):
        apply_edit_batch(p, EditBatch(remove=["missing"]))


def test_monotone_adding_soft_never_lowers_optimum():
    base = [
        hard("h", And((ge(x, 0), le(x, 10)))),
        soft("s1", eq(x, 3), 2.0),
    ]
    p1 = problem(base)
    p2 = problem(base + [soft("s2", eq(x, 7), 1.0)])
    assert solve(p2).satisfied_weight >= solve(p1).satisfied_weight


def test_determinism_bit_identical():
    p = problem(
        [
            hard("pick", Or((eq(x, 0), eq(x, 4), eq(x, 8)))),
            soft("a", ge(x, 2), 1.0),
            soft("b", le(x, 6), 1.0),
            soft("c", eq(y, 3), 2.0),
        ]
    )
    s1, s2 = solve(p), solve(p)
    assert s1.assignment == s2.assignment
    assert s1.branch_choices == s2.branch_choices
    assert s1.satisfied_weight == s2.satisfied_weight


# -- randomized oracle equivalence -------------------------------------------


def random_problem(seed: int) -> LayoutProblem:
    rng = random.Random(seed)
    widgets = tuple(
        Widget(f"w{i}", pref=(float(rng.randint(1, 8)), float(rng.randint(1, 8))))
        for i in range(rng.randint(1, 3))
    )
    pool = [VarId(w.id, a) for w in widgets for a in ("left", "top", "width", "height")]
    pool = pool[: rng.randint(2, min(12, len(pool)))]

    def rand_atom():
        size = rng.randint(1, min(2, len(pool)))
        terms = {v: float(rng.choice([-2, -1, 1, 2])) for v in rng.sample(pool, size)}
        rel = rng.choice([Relation.LE, Relation.GE, Relation.LE, Relation.GE, Relation.EQ])
        return Atom(LinExpr(terms, float(rng.randint(-6, 6))), rel)

    def rand_disjunction(max_disjuncts=3):
        k = rng.randint(2, max_disjuncts)
        children = []
        for _ in range(k):
            if rng.random() < 0.3:
                children.append(And((rand_atom(), rand_atom())))
            else:
                children.append(rand_atom())
        return Or(tuple(children))

    clauses = []
    for i in range(rng.randint(0, 2)):
        clauses.append(hard(f"h{i}", rand_disjunction()))
    if rng.random() < 0.5:
        clauses.append(hard("hp", rand_atom()))
    for i in range(rng.randint(1, 5)):
        f = rand_disjunction() if rng.random() < 0.4 else rand_atom()
        clauses.append(soft(f"s{i}", f, float(rng.randint(1, 5))))
    return problem(clauses, widgets=widgets)


def test_oracle_equivalence_sample():
    agreements = 0
    for seed in range(40):
        p = random_problem(seed)
        try:
            expect = brute_force_solve(p)
        except HardInfeasible:
            with pytest.raises(HardInfeasible):
                solve(p)
            continue
        got = solve(p)
        assert got.optimal
        assert got.satisfied_weight == expect.satisfied_weight, f"seed {seed}"
        assert got.branch_choices == expect.branch_choices, f"seed {seed}"
        agreements += 1
    assert agreements >= 20  # most random problems should be feasible


def test_warm_start_neutrality_on_random_problems():
    for seed in range(25):
        p = random_problem(seed)
        try:
            cold = solve(p)
        except HardInfeasible:
            continue
        edited, warm = resolve_incremental(p, cold, EditBatch())
        assert warm.satisfied_weight == cold.satisfied_weight, f"seed {seed}"
        assert warm.branch_choices == cold.branch_choices, f"seed {seed}"
        # adversarial hint: warm start from a scrambled assignment
        scramble = WarmStart(
            branch_choices={k: 1 for k in cold.branch_choices},
            assignment_hint={v: 99.0 for v in cold.assignment},
        )
        warm2 = solve(p, warm=scramble)
        assert warm2.satisfied_weight == cold.satisfied_weight, f"seed {seed}"
        assert warm2.branch_choices == cold.branch_choices, f"seed {seed}"


def test_hard_soundness_on_random_problems():
    for seed in range(30):
        p = random_problem(seed)
        try:
            sol = solve(p)
        except HardInfeasible:
            continue
        for c in p.hard_clauses():
            assert eval_formula(c.formula, sol.assignment), f"seed {seed}, {c.label}"


def test_satisfied_weight_bounded_by_total():
    for seed in range(20):
        p = random_problem(seed)
        try:
            sol = solve(p)
        except HardInfeasible:
            continue
        assert sol.satisfied_weight <= sol.total_soft_weight + 1e-9


def test_zero_budget_with_no_incumbent_raises_timeout():
    p = problem([hard("pick", Or((eq(x, 0), eq(x, 10)))), soft("s", ge(x, 5), 1.0)])
    with pytest.raises(TimeoutError):
        solve(p, budget=0.0)


def test_edit_batch_add_collision_rejected():
    from orclayout.model import DuplicateLabel

    p = problem([hard("a", ge(x, 0))])
    with pytest.raises(DuplicateLabel):
        apply_edit_batch(p, EditBatch(add=[hard("a", le(x, 5))]))


def test_monotonicity_randomized():
    # adding a soft clause never lowers the optimum of the enlarged problem
    for seed in range(30):
        p = random_problem(seed)
        try:
            base = solve(p)
        except HardInfeasible:
            continue
        extra = soft("extra", eq(x + y, 7.0), 2.5)
        enlarged = LayoutProblem(p.widgets, p.viewport, p.clauses + (extra,))
        assert solve(enlarged).satisfied_weight >= base.satisfied_weight - 1e-9


def test_incremental_insert_matches_scratch_positions():
    from orclayout.bench import diff_problems, edited_document, flow_document
    from orclayout.speclang import lower

    doc = flow_document(5)
    base_problem = lower(doc)
    prev = solve(base_problem)
    new_doc = edited_document(doc, "insert")
    batch = diff_problems(base_problem, lower(new_doc))
    edited, incremental = resolve_incremental(base_problem, prev, batch)
    scratch = solve(edited)
    assert incremental.satisfied_weight == scratch.satisfied_weight
    assert incremental.branch_choices == scratch.branch_choices
    assert incremental.assignment == scratch.assignment
