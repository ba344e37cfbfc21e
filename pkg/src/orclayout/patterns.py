"""Layout pattern templates compiled to clause lists.

Each pattern mirrors one construction from the source material: horizontal /
vertical / solver-chosen flows, the rotation OR-constraint, cross-cutting
size equalization, the connected toolbar redistribution, balanced flows with
factor-restricted rows, alternative positions and widgets, optional widgets,
and flowing around a fixed area. A preference between two disjuncts is
expressed the way hard OR-clauses are defined: the whole disjunction is
hard, each alternative is an independent soft clause, the preferred one with
double weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .model import (
    And,
    Clause,
    DuplicateLabel,
    Formula,
    LayoutProblem,
    LinExpr,
    Or,
    Priority,
    Widget,
    assemble_problem,
    conj,
    disj,
    eq,
    ge,
    hard,
    le,
    soft,
)


class PatternError(Exception):
    pass


class EmptyWidgetList(PatternError):
    pass


class EmptyChildList(PatternError):
    pass


class FewerThanTwoWidgets(PatternError):
    pass


class FewerThanTwoSlots(PatternError):
    pass


class SameWidget(PatternError):
    pass


class ZeroWidgetWidth(PatternError):
    pass


class FixedOutsideContainer(PatternError):
    pass


class UnknownTargetWidget(PatternError):
    pass


LabelCollision = DuplicateLabel


@dataclass(frozen=True)
class Weights:
    """Soft-clause weight scale shared by the pattern templates."""

    preferred_disjunct: float = 2.0
    fallback_disjunct: float = 1.0
    optional_medium_keep: float = 8.0
    optional_medium_drop: float = 1.0
    optional_low_keep: float = 4.0
    optional_low_drop: float = 2.0

    def __post_init__(self):
        if not self.optional_medium_keep > self.optional_low_keep:
            raise ValueError("medium keep weight must exceed low keep weight")
        if not self.optional_medium_drop < self.optional_low_drop:
            raise ValueError("medium drop weight must stay below low drop weight")


DEFAULT_WEIGHTS = Weights()


@dataclass(frozen=True)
class Rect:
    """A rectangle of linear expressions; containers and slots."""

    left: LinExpr
    top: LinExpr
    width: LinExpr
    height: LinExpr

    @property
    def right(self) -> LinExpr:
        return self.left + self.width

    @property
    def bottom(self) -> LinExpr:
        return self.top + self.height

    @staticmethod
    def literal(x: float, y: float, w: float, h: float) -> Rect:
        return Rect(*(LinExpr.const(v) for v in (x, y, w, h)))

    @staticmethod
    def of_viewport(viewport: tuple[float, float]) -> Rect:
        return Rect.literal(0.0, 0.0, viewport[0], viewport[1])

    @staticmethod
    def of_widget(w: Widget) -> Rect:
        return Rect(w.left, w.top, w.width, w.height)

    def is_constant(self) -> bool:
        return not any(e.terms for e in (self.left, self.top, self.width, self.height))

    def constants(self) -> tuple[float, float, float, float]:
        return (
            self.left.constant,
            self.top.constant,
            self.width.constant,
            self.height.constant,
        )


def _contain(w: Widget, c: Rect) -> Formula:
    return And(
        (
            ge(w.left, c.left),
            ge(w.top, c.top),
            le(w.right, c.right),
            le(w.bottom, c.bottom),
        )
    )


def _axis(horizontal: bool):
    """(main position, main size, cross position, cross size) attribute names."""
    if horizontal:
        return "left", "width", "top", "height"
    return "top", "height", "left", "width"


def _v(w: Widget, attr: str) -> LinExpr:
    return LinExpr.var(w.var(attr))


def _flow_pair_formulas(
    widgets: Sequence[Widget], container: Rect, horizontal: bool
) -> list[tuple[Formula, Formula]]:
    """(advance, break) formula pair per widget from the second on.

    advance: directly after the previous widget along the main axis.
    break: at the container's main start, beyond every earlier widget on the
    cross axis, aligned with one of their far edges.
    """
    mp, ms, cp, cs = _axis(horizontal)
    c_main = container.left if horizontal else container.top
    pairs = []
    for i in range(1, len(widgets)):
        cur, prev = widgets[i], widgets[i - 1]
        advance = And(
            (
                eq(_v(cur, mp), _v(prev, mp) + _v(prev, ms)),
                eq(_v(cur, cp), _v(prev, cp)),
            )
        )
        floors = tuple(
            ge(_v(cur, cp), _v(w, cp) + _v(w, cs)) for w in widgets[:i]
        )
        aligns = disj(
            *(eq(_v(cur, cp), _v(w, cp) + _v(w, cs)) for w in widgets[:i])
        )
        brk = And((eq(_v(cur, mp), c_main), *floors, aligns))
        pairs.append((advance, brk))
    return pairs


def _flow(
    widgets: Sequence[Widget],
    container: Rect,
    prefix: str,
    weights: Weights,
    horizontal: bool,
) -> list[Clause]:
    if not widgets:
        raise EmptyWidgetList(prefix)
    mp, ms, cp, cs = _axis(horizontal)
    adv_name, brk_name = ("right", "nextrow") if horizontal else ("below", "nextcol")
    first = widgets[0]
    out = [
        hard(
            f"{prefix}pin:{first.id}",
            And((eq(first.left, container.left), eq(first.top, container.top))),
        )
    ]
    for w in widgets:
        out.append(hard(f"{prefix}contain:{w.id}", _contain(w, container)))
    for i, (advance, brk) in enumerate(_flow_pair_formulas(widgets, container, horizontal)):
        wid = widgets[i + 1].id
        group = f"{prefix}g:{wid}"
        out.append(hard(f"{prefix}or:{wid}", Or((advance, brk))))
        out.append(soft(f"{prefix}{adv_name}:{wid}", advance, weights.preferred_disjunct, group))
        out.append(soft(f"{prefix}{brk_name}:{wid}", brk, weights.fallback_disjunct, group))
    return out


def flow_horizontal(
    widgets: Sequence[Widget],
    container: Rect,
    prefix: str = "hflow:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Left-to-right flow that may break into new rows."""
    return _flow(widgets, container, prefix, weights, horizontal=True)


def flow_vertical(
    widgets: Sequence[Widget],
    container: Rect,
    prefix: str = "vflow:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Top-to-bottom flow that may break into new columns."""
    return _flow(widgets, container, prefix, weights, horizontal=False)


def flow_either(
    widgets: Sequence[Widget],
    container: Rect,
    prefix: str = "eflow:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Flow whose orientation the solver picks, coherently for all pairs."""
    if not widgets:
        raise EmptyWidgetList(prefix)
    first = widgets[0]
    out = [
        hard(
            f"{prefix}pin:{first.id}",
            And((eq(first.left, container.left), eq(first.top, container.top))),
        )
    ]
    for w in widgets:
        out.append(hard(f"{prefix}contain:{w.id}", _contain(w, container)))
    h_pairs = _flow_pair_formulas(widgets, container, horizontal=True)
    v_pairs = _flow_pair_formulas(widgets, container, horizontal=False)
    if h_pairs:
        horizontal = conj(*(Or(p) for p in h_pairs))
        vertical = conj(*(Or(p) for p in v_pairs))
        out.append(hard(f"{prefix}orient", Or((horizontal, vertical))))
        # one preference pair per widget, orientation-agnostic: advancing in
        # the chosen direction beats breaking, and a degenerate zero-size
        # predecessor cannot double-collect both orientations' rewards
        for i in range(len(h_pairs)):
            wid = widgets[i + 1].id
            out.append(
                soft(
                    f"{prefix}advance:{wid}",
                    Or((h_pairs[i][0], v_pairs[i][0])),
                    weights.preferred_disjunct,
                )
            )
            out.append(
                soft(
                    f"{prefix}break:{wid}",
                    Or((h_pairs[i][1], v_pairs[i][1])),
                    weights.fallback_disjunct,
                )
            )
    return out


def rotation_group(
    group: Widget,
    children: Sequence[Widget],
    prefix: str = "rot:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Group that is a vertical stack OR a horizontal row of its children.

    Stack: group height is the sum of child heights and group width their
    maximum; row: the transpose. The maximum is a hard lower bound per child
    plus a disjunction forcing the group edge to touch one child.
    """
    if not children:
        raise EmptyChildList(prefix)
    bounds = [f for c in children for f in (ge(group.width, c.width), ge(group.height, c.height))]
    out = [hard(f"{prefix}maxbound", And(tuple(bounds)))]

    def chain(vertical: bool) -> Formula:
        parts: list[Formula] = []
        size_sum = children[0].height if vertical else children[0].width
        for c in children[1:]:
            size_sum = size_sum + (c.height if vertical else c.width)
        if vertical:
            parts.append(eq(group.height, size_sum))
            parts.append(disj(*(eq(group.width, c.width) for c in children)))
        else:
            parts.append(eq(group.width, size_sum))
            parts.append(disj(*(eq(group.height, c.height) for c in children)))
        head = children[0]
        parts.append(eq(head.left, group.left))
        parts.append(eq(head.top, group.top))
        for prev, cur in zip(children, children[1:]):
            if vertical:
                parts.append(eq(cur.top, prev.bottom))
                parts.append(eq(cur.left, group.left))
            else:
                parts.append(eq(cur.left, prev.right))
                parts.append(eq(cur.top, group.top))
        return And(tuple(parts))

    out.append(hard(f"{prefix}or", Or((chain(vertical=True), chain(vertical=False)))))
    return out


def cross_cutting_equalize(
    groups: Sequence[Sequence[Widget]],
    prefix: str = "eq:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Soft same-size constraints across sub-layout boundaries."""
    flat = [w for g in groups for w in g]
    if len(flat) < 2:
        raise FewerThanTwoWidgets(prefix)
    first = flat[0]
    out = []
    for w in flat[1:]:
        out.append(
            soft(f"{prefix}w:{w.id}", eq(w.width, first.width), weights.preferred_disjunct)
        )
        out.append(
            soft(f"{prefix}h:{w.id}", eq(w.height, first.height), weights.preferred_disjunct)
        )
    return out


def connected_flow(
    widgets: Sequence[Widget],
    area_top: Rect,
    area_left: Rect,
    widget_width: float,
    window_width: float,
    prefix: str = "conn:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Top toolbar takes floor(window_width / widget_width) widgets, the rest
    flow vertically in the left toolbar."""
    if widget_width <= 0:
        raise ZeroWidgetWidth(prefix)
    if not widgets:
        raise EmptyWidgetList(prefix)
    n = len(widgets)
    t_best = min(max(int(math.floor(window_width / widget_width)), 0), n)
    out: list[Clause] = []
    top_ws = widgets[:t_best]
    left_ws = widgets[t_best:]
    if top_ws:
        out.extend(_flow(top_ws, area_top, f"{prefix}top:", weights, horizontal=True))
    if left_ws:
        out.extend(_flow(left_ws, area_left, f"{prefix}left:", weights, horizontal=False))
    return out


def factors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def balanced_row_count(n: int, container_width: float, widget_width: float) -> int:
    """Widgets per row: the factor of n closest to what fits, ties upward."""
    p = min(max(int(math.floor(container_width / widget_width)), 1), n)
    best = 1
    for f in factors(n):
        if abs(f - p) < abs(best - p) or (abs(f - p) == abs(best - p) and f > best):
            best = f
    return best


def balanced_flow(
    widgets: Sequence[Widget],
    container: Rect,
    prefix: str = "bal:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Flow whose rows all hold the same factor-of-n number of widgets."""
    if not widgets:
        raise EmptyWidgetList(prefix)
    if not container.is_constant():
        raise PatternError(f"{prefix}: balanced flow needs a constant container")
    n = len(widgets)
    widget_width = widgets[0].pref[0]
    if widget_width <= 0:
        raise ZeroWidgetWidth(prefix)
    per_row = balanced_row_count(n, container.width.constant, widget_width)
    out: list[Clause] = []
    first = widgets[0]
    eq_parts: list[Formula] = []
    for w in widgets[1:]:
        eq_parts.append(eq(w.width, first.width))
        eq_parts.append(eq(w.height, first.height))
    if eq_parts:
        out.append(hard(f"{prefix}eqsize", And(tuple(eq_parts))))
    for k, w in enumerate(widgets):
        row, col = divmod(k, per_row)
        parts: list[Formula] = []
        if col == 0:
            parts.append(eq(w.left, container.left))
            if row == 0:
                parts.append(eq(w.top, container.top))
            else:
                above = widgets[(row - 1) * per_row]
                parts.append(eq(w.top, above.bottom))
        else:
            prev = widgets[k - 1]
            parts.append(eq(w.left, prev.right))
            parts.append(eq(w.top, prev.top))
        out.append(hard(f"{prefix}cell:{w.id}", And(tuple(parts))))
        out.append(hard(f"{prefix}contain:{w.id}", _contain(w, container)))
    return out


def alternative_positions(
    target: Widget,
    slots: Sequence[Rect],
    prefix: str = "alt:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Pin a widget (or sub-layout root) to one of several slots; earlier
    slots are preferred via declaration order."""
    if len(slots) < 2:
        raise FewerThanTwoSlots(prefix)
    disjuncts = tuple(
        And(
            (
                eq(target.left, s.left),
                eq(target.top, s.top),
                eq(target.width, s.width),
                eq(target.height, s.height),
            )
        )
        for s in slots
    )
    return [hard(f"{prefix}slot:{target.id}", Or(disjuncts))]


def alternative_widgets(
    primary: Widget,
    fallback: Widget,
    prefix: str = "aw:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """Show the primary widget at preferred size, or replace it with the
    co-located fallback; the invisible one collapses to zero size."""
    if primary.id == fallback.id:
        raise SameWidget(primary.id)
    zero_f = And((eq(fallback.width, 0), eq(fallback.height, 0)))
    zero_p = And((eq(primary.width, 0), eq(primary.height, 0)))
    show_p = And(
        (
            eq(primary.width, primary.pref[0]),
            eq(primary.height, primary.pref[1]),
            eq(fallback.width, 0),
            eq(fallback.height, 0),
        )
    )
    show_f = And(
        (
            eq(primary.width, 0),
            eq(primary.height, 0),
            eq(fallback.width, fallback.pref[0]),
            eq(fallback.height, fallback.pref[1]),
        )
    )
    group = f"{prefix}g:{primary.id}"
    return [
        hard(
            f"{prefix}coloc:{fallback.id}",
            And((eq(fallback.left, primary.left), eq(fallback.top, primary.top))),
        ),
        hard(f"{prefix}vis:{primary.id}", Or((zero_f, zero_p))),
        soft(f"{prefix}primary:{primary.id}", show_p, weights.preferred_disjunct, group),
        soft(f"{prefix}fallback:{primary.id}", show_f, weights.fallback_disjunct, group),
    ]


def optional_widget(
    widget: Widget,
    priority: Priority,
    prefix: str = "opt:",
    weights: Weights = DEFAULT_WEIGHTS,
) -> list[Clause]:
    """size = prefSize OR size = 0, weighted by priority.

    High pins the preferred size hard; Medium/Low trade keep-vs-drop softs so
    lower-priority widgets disappear first as space shrinks.
    """
    keep = And((eq(widget.width, widget.pref[0]), eq(widget.height, widget.pref[1])))
    drop = And((eq(widget.width, 0), eq(widget.height, 0)))
    if priority is Priority.HIGH:
        return [hard(f"{prefix}keep:{widget.id}", keep)]
    if priority is Priority.MEDIUM:
        w_keep, w_drop = weights.optional_medium_keep, weights.optional_medium_drop
    else:
        w_keep, w_drop = weights.optional_low_keep, weights.optional_low_drop
    group = f"{prefix}g:{widget.id}"
    return [
        hard(f"{prefix}or:{widget.id}", Or((keep, drop))),
        soft(f"{prefix}keep:{widget.id}", keep, w_keep, group),
        soft(f"{prefix}drop:{widget.id}", drop, w_drop, group),
    ]


def flow_around_fixed(
    widgets: Sequence[Widget],
    fixed: tuple[float, float, float, float],
    container: Rect,
    prefix: str = "around:",
    weights: Weights = DEFAULT_WEIGHTS,
    epsilon: float = 1.0,
) -> list[Clause]:
    """Flow widgets around a fixed rectangle without splitting the window.

    Widgets entirely above or below the fixed rows flow normally; widgets
    sharing rows with it either continue the row (jumping across the fixed
    area when the gap is too small) or break to a new row at the left
    boundary or at the fixed area's right edge. Conditionals are realized as
    NOT(guard) OR consequence with the ε margin.
    """
    if not widgets:
        raise EmptyWidgetList(prefix)
    if not container.is_constant():
        raise PatternError(f"{prefix}: flow-around needs a constant container")
    cl, ct, cw, ch = container.constants()
    fx, fy, fw, fh = (float(v) for v in fixed)
    if not (cl < fx and ct < fy and fx + fw < cl + cw and fy + fh < ct + ch):
        raise FixedOutsideContainer(fixed)
    fr, fb = fx + fw, fy + fh

    def clear_of_fixed(w: Widget) -> Formula:
        return Or(
            (le(w.right, fx), ge(w.left, fr), le(w.bottom, fy), ge(w.top, fb))
        )

    out: list[Clause] = []
    first = widgets[0]
    at_corner = And(
        (eq(first.left, cl), eq(first.top, ct), Or((le(first.right, fx), le(first.bottom, fy))))
    )
    after_fixed = And((eq(first.top, ct), eq(first.left, fr)))
    below_fixed = And((eq(first.left, cl), eq(first.top, fb)))
    out.append(hard(f"{prefix}first:{first.id}", Or((at_corner, after_fixed, below_fixed))))
    for w in widgets:
        out.append(hard(f"{prefix}contain:{w.id}", _contain(w, container)))
    for i in range(1, len(widgets)):
        cur, prev = widgets[i], widgets[i - 1]
        advance = And((eq(cur.left, prev.right), eq(cur.top, prev.top)))
        floors = tuple(ge(cur.top, w.bottom) for w in widgets[:i])
        aligns = disj(
            *(eq(cur.top, w.bottom) for w in widgets[:i]),
            eq(cur.top, fb),
        )
        new_row_core = And((*floors, aligns))
        new_row_plain = And((eq(cur.left, cl), new_row_core))
        new_row_split = And(
            (
                new_row_core,
                Or((And((eq(cur.left, cl), clear_of_fixed(cur))), eq(cur.left, fr))),
            )
        )
        above = le(cur.bottom, fy)
        below = ge(cur.top, fb)
        shares = And((ge(cur.bottom, fy + epsilon), le(cur.top, fb - epsilon)))
        # jumping across the fixed area is only a forward move while the
        # previous widget still sits to its left
        row_fit = And(
            (
                eq(cur.top, prev.top),
                Or(
                    (
                        And((eq(cur.left, prev.right), clear_of_fixed(cur))),
                        And((le(prev.right, fx), eq(cur.left, fr))),
                    )
                ),
            )
        )
        out.append(
            hard(
                f"{prefix}or:{cur.id}",
                Or(
                    (
                        And((above, Or((advance, new_row_plain)))),
                        And((shares, Or((row_fit, new_row_split)))),
                        And((below, Or((advance, new_row_plain)))),
                    )
                ),
            )
        )
        group = f"{prefix}g:{cur.id}"
        out.append(
            soft(f"{prefix}stay:{cur.id}", eq(cur.top, prev.top), weights.preferred_disjunct, group)
        )
        out.append(
            soft(f"{prefix}break:{cur.id}", new_row_core, weights.fallback_disjunct, group)
        )
    return out


# -- instance compilation ----------------------------------------------------


@dataclass(frozen=True)
class PatternInstance:
    """A named template plus parameters; compiles to clauses."""

    kind: str
    targets: tuple[str, ...]
    params: dict = field(default_factory=dict)
    label_prefix: str = ""

    def prefix(self, default: str) -> str:
        return self.label_prefix or default


KINDS = (
    "flow_h",
    "flow_v",
    "flow_either",
    "rotation_group",
    "cross_cut_equalize",
    "connected_flow",
    "balanced_flow",
    "alt_positions",
    "alt_widgets",
    "optional_widget",
    "flow_around_fixed",
)


def _resolve_rect(spec, by_id: dict[str, Widget], viewport) -> Rect:
    if spec in (None, "root"):
        return Rect.of_viewport(viewport)
    if isinstance(spec, Rect):
        return spec
    if isinstance(spec, str):
        if spec not in by_id:
            raise UnknownTargetWidget(spec)
        return Rect.of_widget(by_id[spec])
    return Rect.literal(*spec)


def compile(
    instances: Sequence[PatternInstance],
    widgets: Sequence[Widget],
    viewport: tuple[float, float],
    epsilon: float = 1.0,
    weights: Weights = DEFAULT_WEIGHTS,
    extra_clauses: Sequence[Clause] = (),
) -> LayoutProblem:
    """Compile pattern instances plus raw clauses into an assembled problem."""
    by_id = {w.id: w for w in widgets}

    def targets_of(inst: PatternInstance) -> list[Widget]:
        out = []
        for wid in inst.targets:
            if wid not in by_id:
                raise UnknownTargetWidget(wid)
            out.append(by_id[wid])
        return out

    clauses: list[Clause] = []
    suppress: set[str] = set()
    for idx, inst in enumerate(instances):
        ts = targets_of(inst)
        p = inst.prefix(f"p{idx}:{inst.kind}:")
        params = inst.params
        if inst.kind == "flow_h":
            clauses += flow_horizontal(ts, _resolve_rect(params.get("container"), by_id, viewport), p, weights)
        elif inst.kind == "flow_v":
            clauses += flow_vertical(ts, _resolve_rect(params.get("container"), by_id, viewport), p, weights)
        elif inst.kind == "flow_either":
            clauses += flow_either(ts, _resolve_rect(params.get("container"), by_id, viewport), p, weights)
        elif inst.kind == "rotation_group":
            gid = params["group"]
            if gid not in by_id:
                raise UnknownTargetWidget(gid)
            clauses += rotation_group(by_id[gid], ts, p, weights)
            suppress.add(gid)
        elif inst.kind == "cross_cut_equalize":
            clauses += cross_cutting_equalize([ts], p, weights)
        elif inst.kind == "connected_flow":
            clauses += connected_flow(
                ts,
                _resolve_rect(params.get("top"), by_id, viewport),
                _resolve_rect(params.get("left"), by_id, viewport),
                float(params.get("widget_width") or ts[0].pref[0]),
                float(params.get("window_width") or viewport[0]),
                p,
                weights,
            )
        elif inst.kind == "balanced_flow":
            clauses += balanced_flow(ts, _resolve_rect(params.get("container"), by_id, viewport), p, weights)
        elif inst.kind == "alt_positions":
            slots = [_resolve_rect(s, by_id, viewport) for s in params["slots"]]
            clauses += alternative_positions(ts[0], slots, p, weights)
        elif inst.kind == "alt_widgets":
            if len(ts) != 2:
                raise PatternError(f"{p}: alt_widgets needs exactly two targets")
            clauses += alternative_widgets(ts[0], ts[1], p, weights)
            suppress.update((ts[0].id, ts[1].id))
        elif inst.kind == "optional_widget":
            prio = params.get("priority", ts[0].priority)
            if isinstance(prio, str):
                prio = Priority(prio)
            clauses += optional_widget(ts[0], prio, p, weights)
            suppress.add(ts[0].id)
        elif inst.kind == "flow_around_fixed":
            clauses += flow_around_fixed(
                ts,
                tuple(params["fixed"]),
                _resolve_rect(params.get("container"), by_id, viewport),
                p,
                weights,
                epsilon,
            )
        else:
            raise PatternError(f"unknown pattern kind {inst.kind!r}")
    clauses.extend(extra_clauses)
    return assemble_problem(widgets, viewport, clauses, epsilon, suppress_pref=suppress)
