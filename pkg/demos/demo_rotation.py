"""One layout specification, two orientations.

Solves the rotation spec at a landscape and a portrait viewport and shows the
group flipping between a horizontal row and a vertical stack, then writes an
SVG of each. The OR-constraint carries both alternatives; the solver picks
whichever satisfies the viewport.
"""

from pathlib import Path

from orclayout.render import render_svg
from orclayout.solver import solve
from orclayout.speclang import lower, parse

SPEC = (Path(__file__).resolve().parent.parent / "specs" / "rotation.orc").read_text()
OUT = Path(__file__).resolve().parent / "out"


def describe(sol, problem, label):
    print(f"\n{label}: viewport {problem.viewport[0]:g}x{problem.viewport[1]:g}")
    branch = sol.branch_choices["p0:rotate_group:or"]
    print("  chosen branch:", "vertical stack" if branch == 1 else "horizontal row")
    for wid in ("g", "c1", "c2", "c3"):
        left, top, width, height = sol.rect(wid)
        print(f"  {wid}: ({left:g}, {top:g}) {width:g}x{height:g}")


def main():
    doc = parse(SPEC).document
    OUT.mkdir(exist_ok=True)
    for label, viewport in (("landscape", (300.0, 100.0)), ("portrait", (100.0, 300.0))):
        problem = lower(doc, viewport=viewport)
        sol = solve(problem)
        describe(sol, problem, label)
        path = OUT / f"rotation_{label}.svg"
        path.write_text(render_svg(sol, problem), encoding="utf-8")
        print(f"  wrote {path}")


if __name__ == "__main__":
    main()
