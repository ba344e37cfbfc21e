"""Ribbon widgets disappearing by priority as the window shrinks.

High keeps its preferred size as a hard constraint; Medium and Low trade
"size = pref OR size = 0" softs so the low-priority widget vanishes first.
"""

from pathlib import Path

from orclayout.solver import solve
from orclayout.speclang import lower, parse

SPEC = (Path(__file__).resolve().parent.parent / "specs" / "ribbon.orc").read_text()


def main():
    doc = parse(SPEC).document
    print("width  visible widgets")
    for width in range(200, 50, -10):
        sol = solve(lower(doc, viewport=(float(width), 60.0)))
        visible = " ".join(w for w in ("h", "m", "l") if sol.visible(w))
        print(f"{width:>5}  {visible}")


if __name__ == "__main__":
    main()
