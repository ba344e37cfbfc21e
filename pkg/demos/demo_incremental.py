"""Incremental re-solving after edits.

Solves a flow, applies an insert and a window resize through EditBatches, and
compares warm-started incremental timings against full rebuilds.
"""

import time

from orclayout.bench import diff_problems, edited_document, flow_document
from orclayout.lp import Tableau
from orclayout.solver import WarmStart, resolve_incremental, solve
from orclayout.speclang import lower


def main():
    doc = flow_document(12)
    problem = lower(doc)
    session_tab = Tableau()
    prev = solve(problem, warm=WarmStart(tableau=session_tab))
    print(f"base: {len(problem.clauses)} clauses, weight {prev.satisfied_weight}")
    for op in ("insert", "delete", "move", "resize_window"):
        new_doc = edited_document(doc, op)
        t0 = time.perf_counter()
        fresh_problem = lower(new_doc)
        fresh = solve(fresh_problem)
        t1 = time.perf_counter()
        batch = diff_problems(problem, lower(new_doc))
        t2 = time.perf_counter()
        edited, incr = resolve_incremental(problem, prev, batch, tableau=session_tab)
        t3 = time.perf_counter()
        assert incr.satisfied_weight == fresh.satisfied_weight
        print(
            f"{op:>14}: fresh {1000 * (t1 - t0):6.1f} ms | "
            f"incremental {1000 * (t3 - t2):6.1f} ms | "
            f"weight {incr.satisfied_weight}"
        )


if __name__ == "__main__":
    main()
