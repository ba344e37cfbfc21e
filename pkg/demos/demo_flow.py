"""Horizontal flow wrapping as the window narrows.

Sweeps the window width over the same three-widget flow spec and prints the
row layout at each step: "to the right OR at the start of the next row" per
widget pair, decided by the solver.
"""

from pathlib import Path

from orclayout.solver import solve
from orclayout.speclang import lower, parse

SPEC = (Path(__file__).resolve().parent.parent / "specs" / "flow3.orc").read_text()


def main():
    doc = parse(SPEC).document
    for width in (300, 200, 150, 120, 100):
        problem = lower(doc, viewport=(float(width), 200.0))
        sol = solve(problem)
        rows = {}
        for w in ("w1", "w2", "w3"):
            left, top, _, _ = sol.rect(w)
            rows.setdefault(top, []).append((left, w))
        print(f"width {width}:")
        for top in sorted(rows):
            line = "  ".join(w for _, w in sorted(rows[top]))
            print(f"  y={top:g}: {line}")


if __name__ == "__main__":
    main()
