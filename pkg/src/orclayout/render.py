"""SVG rendering and JSON solution records."""

from __future__ import annotations

from dataclasses import dataclass, field
from .model import LayoutProblem, Solution

DEFAULT_FILLS = {
    "button": "#cfe3ff",
    "listbox": "#ffe9c7",
    "optionmenu": "#ffd7e0",
    "toolbar": "#d8f0d3",
    "label": "#f2f2f2",
}


@dataclass(frozen=True)
class RenderTheme:
    """Pure presentation; never affects geometry."""

    fills: dict = field(default_factory=lambda: dict(DEFAULT_FILLS))
    default_fill: str = "#e4e8f0"
    stroke: str = "#39424e"
    font_size: float = 11.0
    viewport_stroke: str = "#9aa4b0"

    def fill_for(self, kind: str) -> str:
        return self.fills.get(kind, self.default_fill)


DEFAULT_THEME = RenderTheme()


def _num(v: float) -> str:
    return f"{v:g}"


def render_svg(
    solution: Solution, problem: LayoutProblem, theme: RenderTheme = DEFAULT_THEME
) -> str:
    """One rect plus centered label per visible widget, in declaration order.

    Zero-size widgets are omitted; identical solutions produce byte-identical
    output."""
    vw, vh = problem.viewport
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_num(vw)} {_num(vh)}" '
        f'width="{_num(vw)}" height="{_num(vh)}">',
        f'  <rect x="0" y="0" width="{_num(vw)}" height="{_num(vh)}" '
        f'fill="white" stroke="{theme.viewport_stroke}"/>',
    ]
    for w in problem.widgets:
        if not solution.visible(w.id):
            continue
        left, top, width, height = solution.rect(w.id)
        lines.append(
            f'  <rect x="{_num(left)}" y="{_num(top)}" width="{_num(width)}" '
            f'height="{_num(height)}" fill="{theme.fill_for(w.kind)}" '
            f'stroke="{theme.stroke}"/>'
        )
        lines.append(
            f'  <text x="{_num(left + width / 2)}" y="{_num(top + height / 2)}" '
            f'font-size="{_num(theme.font_size)}" text-anchor="middle" '
            f'dominant-baseline="central">{w.id}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def solution_record(
    solution: Solution, problem: LayoutProblem, include_time: bool = True
) -> dict:
    """The JSON solution schema shared by the CLI and the HTTP service.

    The CLI omits solve_ms so repeated runs are byte-identical."""
    record = {
        "optimal": solution.optimal,
        "satisfied_weight": solution.satisfied_weight,
        "widgets": [
            {
                "id": w.id,
                "left": solution.assignment[w.var("left")],
                "top": solution.assignment[w.var("top")],
                "width": solution.assignment[w.var("width")],
                "height": solution.assignment[w.var("height")],
                "visible": solution.visible(w.id),
            }
            for w in problem.widgets
        ],
        "branch_choices": dict(solution.branch_choices),
    }
    if include_time:
        record["solve_ms"] = solution.solve_time * 1000.0
    return record
