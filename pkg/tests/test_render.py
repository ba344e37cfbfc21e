import json

from orclayout.render import render_svg, solution_record, DEFAULT_THEME
from orclayout.solver import solve
from orclayout.speclang import lower, parse

SPEC = """
layout "r" {
  window { width: 200; height: 100; }
  widget a { pref: 50x20; }
  widget hidden { pref: 40x20; }
  pattern optional(target: hidden, priority: low);
  constraint hard: a.left == 0 && a.top == 0;
  constraint hard: hidden.left == 150 && hidden.top == 90;
}
"""


def solved():
    problem = lower(parse(SPEC).document)
    return problem, solve(problem)


def test_svg_single_rect_at_coordinates():
    problem, sol = solved()
    svg = render_svg(sol, problem)
    assert svg.count("<rect") >= 2  # viewport border + widget a
    assert '<rect x="0" y="0" width="50" height="20"' in svg
    assert 'viewBox="0 0 200 100"' in svg


def test_svg_hides_zero_size_widgets():
    # hidden is pinned at (150,90): keeping pref height 20 would overflow the
    # 100px-tall window, so the optional pattern collapses it to zero size
    problem, sol = solved()
    assert not sol.visible("hidden")
    svg = render_svg(sol, problem)
    assert ">hidden<" not in svg
    assert ">a<" in svg


def test_svg_deterministic():
    p1, s1 = solved()
    p2, s2 = solved()
    assert render_svg(s1, p1) == render_svg(s2, p2)


def test_record_geometry_agrees_with_svg():
    problem, sol = solved()
    record = solution_record(sol, problem, include_time=False)
    svg = render_svg(sol, problem)
    for w in record["widgets"]:
        if not w["visible"]:
            continue
        tag = f'<rect x="{w["left"]:g}" y="{w["top"]:g}" width="{w["width"]:g}" height="{w["height"]:g}"'
        assert tag in svg
    assert "solve_ms" not in record
    json.dumps(record)  # serializable


def test_record_includes_time_for_service():
    problem, sol = solved()
    record = solution_record(sol, problem, include_time=True)
    assert record["solve_ms"] >= 0.0
