"""Timing harness: fresh re-solving versus incremental re-solving.

Workloads are horizontal flows with the "to the right OR at the beginning of
next line" constraint per widget pair. The fresh column rebuilds the whole
constraint system from the document and solves cold; the incremental column
applies an EditBatch to the previous system and solves warm-started from the
previous solution. The batch itself stands in for the editor's knowledge of
which constraints an edit makes obsolete, so its construction is not timed.
"""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass, replace
from typing import Callable

from .lp import Tableau
from .model import LayoutProblem
from .solver import EditBatch, WarmStart, resolve_incremental, solve
from . import speclang

OPS = ("insert", "delete", "move", "resize_widget", "resize_window")

WIDGET_PREF = (50.0, 20.0)


def bench_viewport(n: int) -> tuple[float, float]:
    """Sized so the flow wraps into two rows: every pair clause is a live
    disjunction and one break must be placed. One widget of headroom keeps
    the insert workload at two rows as well."""
    per_row = (n + 2) // 2
    return (WIDGET_PREF[0] * per_row + 10.0, 600.0)


@dataclass
class BenchRow:
    op: str
    widgets: int
    constraints: int
    mean_ms_fresh: float
    mean_ms_incremental: float

    @property
    def savings_pct(self) -> float:
        if self.mean_ms_fresh <= 0:
            return 0.0
        return 100.0 * (self.mean_ms_fresh - self.mean_ms_incremental) / self.mean_ms_fresh


def flow_document(n: int) -> speclang.LayoutDocument:
    width, height = bench_viewport(n)
    lines = ['layout "bench" {']
    lines.append(f"  window {{ width: {width:g}; height: {height:g}; }}")
    for i in range(n):
        lines.append(
            f"  widget w{i} {{ min: 1x1; pref: {WIDGET_PREF[0]:g}x{WIDGET_PREF[1]:g}; }}"
        )
    items = ", ".join(f"w{i}" for i in range(n))
    lines.append(f"  pattern hflow(items: [{items}], container: root);")
    lines.append("}")
    result = speclang.parse("\n".join(lines))
    assert result.ok, result.diagnostics
    return result.document


def edited_document(doc: speclang.LayoutDocument, op: str) -> speclang.LayoutDocument:
    n = len(doc.widgets)
    mid = min((n + 2) // 2, n - 1)  # the widget leading the second row
    widgets = list(doc.widgets)
    patterns = list(doc.patterns)
    constraints = list(doc.constraints)
    viewport = doc.viewport
    if op == "insert":
        new = speclang.WidgetDecl(name="wnew", min=(1.0, 1.0), pref=(50.0, 20.0))
        widgets.insert(mid, new)
        items = list(patterns[0].args[0].value)
        items.insert(mid, "wnew")
        patterns[0] = replace(
            patterns[0],
            args=(speclang.Arg("items", tuple(items)),) + patterns[0].args[1:],
        )
    elif op == "delete":
        victim = widgets.pop(mid).name
        items = tuple(w for w in patterns[0].args[0].value if w != victim)
        patterns[0] = replace(
            patterns[0], args=(speclang.Arg("items", items),) + patterns[0].args[1:]
        )
    elif op == "move":
        # drag the middle widget to the start of the next row, a position the
        # flow clauses can realize
        target = widgets[mid].name
        src = f"constraint soft(2): {target}.left == 0 && {target}.top == {WIDGET_PREF[1]:g};"
        snippet = speclang.parse(
            'layout "m" { widget %s { pref: 50x20; } %s }' % (target, src)
        )
        constraints.append(snippet.document.constraints[0])
    elif op == "resize_widget":
        widgets[mid] = replace(widgets[mid], pref=(70.0, 25.0))
    elif op == "resize_window":
        width, height = bench_viewport(n)
        viewport = speclang.ViewportDecl(width - WIDGET_PREF[0], height)
    else:
        raise ValueError(f"unknown op {op!r}")
    return replace(
        doc,
        viewport=viewport,
        widgets=tuple(widgets),
        patterns=tuple(patterns),
        constraints=tuple(constraints),
    )


def diff_problems(old: LayoutProblem, new: LayoutProblem) -> EditBatch:
    """EditBatch turning `old` into `new`: removed/changed/added user clauses
    plus widget and viewport changes; auto clauses follow the widgets."""
    from .solver import _is_auto

    old_user = {c.label: c for c in old.clauses if not _is_auto(c.label)}
    new_user = {c.label: c for c in new.clauses if not _is_auto(c.label)}
    remove = [l for l, c in old_user.items() if l not in new_user or new_user[l] != c]
    add = [c for l, c in new_user.items() if l not in old_user or old_user[l] != c]
    old_w = {w.id: w for w in old.widgets}
    new_w = {w.id: w for w in new.widgets}
    changes = []
    for wid, w in new_w.items():
        if wid not in old_w:
            changes.append(("add", w))
        elif old_w[wid] != w:
            changes.append(("retarget", w))
    for wid in old_w:
        if wid not in new_w:
            changes.append(("remove", wid))
    viewport = new.viewport if new.viewport != old.viewport else None
    return EditBatch(remove=remove, add=add, widget_changes=changes, viewport=viewport)


def run_bench(
    widget_counts: list[int],
    ops: list[str],
    repeats: int = 10,
    progress: Callable[[str], None] = lambda msg: None,
) -> list[BenchRow]:
    rows = []
    for n in widget_counts:
        doc = flow_document(n)
        base_problem = speclang.lower(doc)
        base_solution = solve(base_problem)
        for op in ops:
            new_doc = edited_document(doc, op)
            batch = diff_problems(base_problem, speclang.lower(new_doc))
            fresh_times, incr_times, n_constraints = [], [], 0
            # untimed warmup of both paths (allocator and caches)
            solve(speclang.lower(new_doc))
            warmup_tab = Tableau()
            solve(base_problem, warm=WarmStart(tableau=warmup_tab))
            resolve_incremental(base_problem, base_solution, batch, tableau=warmup_tab)
            for _ in range(repeats):
                gc.collect()
                gc.disable()
                try:
                    t0 = time.perf_counter()
                    fresh_problem = speclang.lower(new_doc)
                    solve(fresh_problem)
                    t1 = time.perf_counter()
                finally:
                    gc.enable()
                fresh_times.append(t1 - t0)
                n_constraints = len(fresh_problem.clauses)
                # session state as an editor would hold it: the pre-edit
                # problem solved once on this tableau (not timed)
                session_tab = Tableau()
                solve(base_problem, warm=WarmStart(tableau=session_tab))
                gc.collect()
                gc.disable()
                try:
                    t2 = time.perf_counter()
                    resolve_incremental(
                        base_problem, base_solution, batch, tableau=session_tab
                    )
                    t3 = time.perf_counter()
                finally:
                    gc.enable()
                incr_times.append(t3 - t2)
            row = BenchRow(
                op=op,
                widgets=n,
                constraints=n_constraints,
                mean_ms_fresh=1000.0 * sum(fresh_times) / len(fresh_times),
                mean_ms_incremental=1000.0 * sum(incr_times) / len(incr_times),
            )
            progress(
                f"{op} n={n}: fresh {row.mean_ms_fresh:.1f} ms, "
                f"incremental {row.mean_ms_incremental:.1f} ms "
                f"({row.savings_pct:.0f}% saved)"
            )
            rows.append(row)
    return rows


def rows_to_csv(rows: list[BenchRow]) -> str:
    lines = ["op,widgets,constraints,mean_ms_fresh,mean_ms_incremental,savings_pct"]
    for r in rows:
        lines.append(
            f"{r.op},{r.widgets},{r.constraints},"
            f"{r.mean_ms_fresh:.3f},{r.mean_ms_incremental:.3f},{r.savings_pct:.1f}"
        )
    return "\n".join(lines) + "\n"
