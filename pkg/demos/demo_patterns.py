"""Tour of the pattern templates through the library API.

Builds balanced flow, alternative positions, alternative widgets, and
flow-around-a-fixed-area problems directly, solves each, and prints the
resulting geometry.
"""

from orclayout.model import Widget, assemble_problem
from orclayout.patterns import (
    Rect,
    alternative_positions,
    alternative_widgets,
    balanced_flow,
    flow_around_fixed,
)
from orclayout.solver import solve


def show(sol, widgets, note=""):
    if note:
        print(f"  ({note})")
    for w in widgets:
        left, top, width, height = sol.rect(w.id)
        tag = "" if sol.visible(w.id) else "   [hidden]"
        print(f"  {w.id}: ({left:g}, {top:g}) {width:g}x{height:g}{tag}")


def balanced():
    print("\nbalanced flow, 6 buttons, rows restricted to factors {1, 2, 3, 6}:")
    widgets = [Widget(f"b{i}", pref=(40.0, 20.0)) for i in range(1, 7)]
    for width in (260.0, 130.0, 90.0):
        clauses = balanced_flow(widgets, Rect.literal(0, 0, width, 400))
        sol = solve(assemble_problem(widgets, (width, 400), clauses))
        rows = sorted({sol.rect(w.id)[1] for w in widgets})
        counts = [sum(1 for w in widgets if sol.rect(w.id)[1] == top) for top in rows]
        print(f"  container {width:g}px -> rows of {counts}")


def alt_positions():
    print("\nalternative positions: toolbar on top OR to the left:")
    toolbar = Widget("toolbar", pref=(300.0, 40.0), kind="toolbar")
    slots = [Rect.literal(0, 0, 300, 40), Rect.literal(0, 0, 40, 300)]
    for viewport in ((320.0, 200.0), (100.0, 320.0)):
        clauses = alternative_positions(toolbar, slots)
        sol = solve(assemble_problem([toolbar], viewport, clauses))
        print(f"  viewport {viewport[0]:g}x{viewport[1]:g}:")
        show(sol, [toolbar])


def alt_widgets():
    print("\nalternative widgets: a list box replaced by an option menu when tight:")
    listbox = Widget("list", pref=(80.0, 30.0), kind="listbox")
    menu = Widget("menu", pref=(40.0, 30.0), kind="optionmenu")
    from orclayout.model import And, eq, hard

    for width in (200.0, 50.0):
        clauses = alternative_widgets(listbox, menu)
        clauses.append(hard("pin", And((eq(listbox.left, 0), eq(listbox.top, 0)))))
        problem = assemble_problem(
            [listbox, menu], (width, 100), clauses, suppress_pref=["list", "menu"]
        )
        sol = solve(problem)
        print(f"  viewport width {width:g}:")
        show(sol, [listbox, menu])


def around():
    print("\nflowing widgets around a fixed area:")
    widgets = [Widget(f"w{i}", pref=(45.0, 30.0), min=(5.0, 5.0)) for i in range(1, 9)]
    fixed = (60.0, 40.0, 60.0, 60.0)
    clauses = flow_around_fixed(widgets, fixed, Rect.of_viewport((260.0, 300.0)))
    sol = solve(assemble_problem(widgets, (260.0, 300.0), clauses))
    print(f"  fixed area at ({fixed[0]:g}, {fixed[1]:g}) {fixed[2]:g}x{fixed[3]:g}")
    show(sol, widgets)


def main():
    balanced()
    alt_positions()
    alt_widgets()
    around()


if __name__ == "__main__":
    main()
