"""HTTP session service: parse, solve, and incrementally edit layouts.

One mutable session per id, strictly serialized per session; every accepted
edit re-solves with a warm start from the previous solution and bumps the
revision exactly once. Rejected edits (conflicts, validation failures) leave
the session untouched.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import speclang
from .model import LayoutError, Solution
from .patterns import PatternError
from .render import solution_record
from .solver import HardInfeasible, WarmStart, solve

EDIT_BUDGET_S = 0.5

EDIT_TYPES = (
    "insert_widget",
    "delete_widget",
    "move_widget",
    "resize_widget",
    "set_viewport",
    "add_pattern",
    "remove_pattern",
    "add_constraint",
    "remove_constraint",
)


class CreateSessionBody(BaseModel):
    spec: str


class EditBody(BaseModel):
    expected_revision: int
    edit: dict


@dataclass
class Session:
    id: str
    document: speclang.LayoutDocument
    problem: object
    last_solution: Optional[Solution]
    revision: int = 0
    conflicts: list[str] = field(default_factory=list)
    move_constraints: dict[str, int] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


class EditError(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _size_pair(value, name: str) -> tuple[float, float]:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise EditError(f"{name} must be a [width, height] pair")
    return (float(value[0]), float(value[1]))


def _widget_decl(payload: dict) -> speclang.WidgetDecl:
    if not isinstance(payload, dict) or "id" not in payload:
        raise EditError("insert_widget needs a widget object with an id")
    pref = _size_pair(payload.get("pref", [50, 20]), "pref")
    decl = speclang.WidgetDecl(
        name=str(payload["id"]),
        pref=pref,
        min=_size_pair(payload["min"], "min") if "min" in payload else None,
        max=_size_pair(payload["max"], "max") if "max" in payload else None,
        priority=payload.get("priority"),
    )
    if decl.priority not in (None, "high", "medium", "low"):
        raise EditError("priority must be high, medium, or low")
    return decl


def _json_arg_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, list):
        if all(isinstance(v, str) for v in value):
            return tuple(value)
        if len(value) == 4 and all(isinstance(v, (int, float)) for v in value):
            return tuple(float(v) for v in value)
    raise EditError(f"unsupported pattern argument value {value!r}")


def _pattern_decl(payload: dict) -> speclang.PatternDecl:
    kind = payload.get("kind")
    if kind not in speclang.PATTERN_KINDS:
        raise EditError(f"unknown pattern kind {kind!r}")
    args = []
    for name, value in (payload.get("args") or {}).items():
        if name == "slots":
            if not isinstance(value, list):
                raise EditError("slots must be a list of rects")
            for rect in value:
                args.append(speclang.Arg("slot", _json_arg_value(rect)))
        else:
            args.append(speclang.Arg(name, _json_arg_value(value)))
    return speclang.PatternDecl(kind, tuple(args))


def apply_document_edit(
    doc: speclang.LayoutDocument, edit: dict, move_constraints: dict[str, int]
) -> tuple[speclang.LayoutDocument, dict[str, int]]:
    """Pure document-level edit; raises EditError on invalid payloads."""
    etype = edit.get("type")
    if etype not in EDIT_TYPES:
        raise EditError(f"unknown edit type {etype!r}")
    widgets = list(doc.widgets)
    patterns = list(doc.patterns)
    constraints = list(doc.constraints)
    viewport = doc.viewport
    moves = dict(move_constraints)

    def widget_index(wid: str) -> int:
        for i, w in enumerate(widgets):
            if w.name == wid:
                return i
        raise EditError(f"unknown widget {wid!r}")

    if etype == "insert_widget":
        decl = _widget_decl(edit.get("widget", {}))
        if any(w.name == decl.name for w in widgets):
            raise EditError(f"widget {decl.name!r} already exists")
        widgets.append(decl)
        if "pattern" in edit and edit["pattern"] is not None:
            pi = int(edit["pattern"])
            if not 0 <= pi < len(patterns):
                raise EditError(f"no pattern at index {pi}")
            target_arg = None
            for a in patterns[pi].args:
                if a.name in ("items", "children"):
                    target_arg = a
                    break
            if target_arg is None:
                raise EditError("pattern has no widget list to insert into")
            items = list(target_arg.value)
            index = edit.get("index")
            index = len(items) if index is None else max(0, min(int(index), len(items)))
            items.insert(index, decl.name)
            new_args = tuple(
                speclang.Arg(a.name, tuple(items)) if a is target_arg else a
                for a in patterns[pi].args
            )
            patterns[pi] = replace(patterns[pi], args=new_args)
    elif etype == "delete_widget":
        wid = edit.get("id")
        widgets.pop(widget_index(wid))
        kept_patterns = []
        for p in patterns:
            drop = False
            new_args = []
            for a in p.args:
                if a.name in ("items", "children"):
                    remaining = tuple(w for w in a.value if w != wid)
                    if not remaining:
                        drop = True
                    new_args.append(speclang.Arg(a.name, remaining))
                elif a.value == wid:
                    drop = True
                else:
                    new_args.append(a)
            if not drop:
                kept_patterns.append(replace(p, args=tuple(new_args)))
        patterns = kept_patterns
        kept_constraints = []
        index_map = {}
        for old_i, c in enumerate(constraints):
            if all(ref.widget != wid for ref in speclang._formula_refs(c.formula)):
                index_map[old_i] = len(kept_constraints)
                kept_constraints.append(c)
        constraints = kept_constraints
        moves.pop(wid, None)
        moves = {w: index_map[i] for w, i in moves.items() if i in index_map}
    elif etype == "move_widget":
        wid = edit.get("id")
        widget_index(wid)
        left, top = float(edit.get("left", 0)), float(edit.get("top", 0))
        formula, diags = speclang.parse_formula(
            f"{wid}.left == {left:g} && {wid}.top == {top:g}"
        )
        if formula is None:
            raise EditError("; ".join(d.message for d in diags))
        decl = speclang.ConstraintDecl("soft", 2.0, formula)
        if wid in moves and moves[wid] < len(constraints):
            constraints[moves[wid]] = decl
        else:
            moves[wid] = len(constraints)
            constraints.append(decl)
    elif etype == "resize_widget":
        wid = edit.get("id")
        i = widget_index(wid)
        w = widgets[i]
        pref = (float(edit.get("width", w.pref[0])), float(edit.get("height", w.pref[1])))
        lo = w.min
        hi = w.max
        if lo is not None:
            lo = (min(lo[0], pref[0]), min(lo[1], pref[1]))
        if hi is not None:
            hi = (max(hi[0], pref[0]), max(hi[1], pref[1]))
        widgets[i] = replace(w, pref=pref, min=lo, max=hi)
    elif etype == "set_viewport":
        viewport = speclang.ViewportDecl(
            float(edit.get("width", 0)), float(edit.get("height", 0))
        )
        if viewport.width <= 0 or viewport.height <= 0:
            raise EditError("viewport must be positive")
    elif etype == "add_pattern":
        patterns.append(_pattern_decl(edit))
    elif etype == "remove_pattern":
        pi = int(edit.get("index", -1))
        if not 0 <= pi < len(patterns):
            raise EditError(f"no pattern at index {pi}")
        patterns.pop(pi)
    elif etype == "add_constraint":
        strength = edit.get("strength", "soft")
        if strength not in ("hard", "soft"):
            raise EditError("strength must be hard or soft")
        weight = None
        if strength == "soft":
            weight = float(edit.get("weight", 1.0))
            if weight <= 0:
                raise EditError("weight must be positive")
        formula, diags = speclang.parse_formula(str(edit.get("formula", "")))
        if formula is None:
            raise EditError("; ".join(d.message for d in diags) or "empty formula")
        constraints.append(speclang.ConstraintDecl(strength, weight, formula))
    elif etype == "remove_constraint":
        label = str(edit.get("label", ""))
        if not label.startswith("c"):
            raise EditError(f"unknown constraint label {label!r}")
        try:
            index = int(label[1:]) - 1
        except ValueError:
            raise EditError(f"unknown constraint label {label!r}")
        if not 0 <= index < len(constraints):
            raise EditError(f"unknown constraint label {label!r}")
        constraints.pop(index)
        moves = {w: i for w, i in moves.items() if i != index}
        moves = {w: (i - 1 if i > index else i) for w, i in moves.items()}
    new_doc = replace(
        doc,
        viewport=viewport,
        widgets=tuple(widgets),
        patterns=tuple(patterns),
        constraints=tuple(constraints),
    )
    return new_doc, moves


def create_app(snapshot_dir: Optional[str] = None) -> FastAPI:
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def snapshot_sessions():
        if not snapshot_dir:
            return
        out = Path(snapshot_dir)
        out.mkdir(parents=True, exist_ok=True)
        with registry_lock:
            for session in sessions.values():
                payload = {
                    "id": session.id,
                    "revision": session.revision,
                    "spec": speclang.print_document(session.document),
                }
                (out / f"{session.id}.json").write_text(
                    json.dumps(payload, indent=2), encoding="utf-8"
                )

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        snapshot_sessions()

    app = FastAPI(title="orclayout service", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def solve_document(
        doc: speclang.LayoutDocument,
        viewport=None,
        prev: Optional[Solution] = None,
    ):
        try:
            problem = speclang.lower(doc, viewport=viewport)
        except (speclang.LowerError, PatternError, LayoutError) as err:
            raise EditError(str(err))
        warm = None
        if prev is not None:
            warm = WarmStart(dict(prev.branch_choices), dict(prev.assignment))
        try:
            solution = solve(problem, budget=EDIT_BUDGET_S, warm=warm)
            return problem, solution, []
        except HardInfeasible as err:
            return problem, None, list(err.labels)
        except TimeoutError:
            raise EditError("solve budget exhausted before any solution was found")

    def session_payload(session: Session) -> dict:
        body = {"id": session.id, "revision": session.revision}
        if session.last_solution is not None:
            body["solution"] = solution_record(session.last_solution, session.problem)
        else:
            body["solution"] = None
            body["conflicts"] = session.conflicts
        return body

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody, response: Response):
        result = speclang.parse(body.spec)
        diags = list(result.diagnostics)
        if result.document is not None:
            diags += speclang.validate(result.document)
        errors = [d for d in diags if d.severity == "error"]
        if result.document is None or errors:
            response.status_code = 422
            return {
                "diagnostics": [
                    {"message": d.message, "line": d.span.line, "column": d.span.column}
                    for d in errors
                ]
            }
        try:
            problem, solution, conflicts = solve_document(result.document)
        except EditError as err:
            response.status_code = 422
            return {"diagnostics": [{"message": err.reason, "line": 0, "column": 0}]}
        session = Session(
            id=uuid.uuid4().hex[:12],
            document=result.document,
            problem=problem,
            last_solution=solution,
            conflicts=conflicts,
        )
        with registry_lock:
            sessions[session.id] = session
        return session_payload(session)

    def find(session_id: str) -> Optional[Session]:
        with registry_lock:
            return sessions.get(session_id)

    @app.get("/v1/sessions/{session_id}/solution")
    def get_solution(
        session_id: str,
        response: Response,
        width: Optional[float] = None,
        height: Optional[float] = None,
    ):
        session = find(session_id)
        if session is None:
            response.status_code = 404
            return {"error": "unknown session"}
        with session.lock:
            if width is not None and height is not None:
                try:
                    problem, solution, conflicts = solve_document(
                        session.document, viewport=(width, height), prev=session.last_solution
                    )
                except EditError as err:
                    response.status_code = 422
                    return {"error": err.reason}
                body = {"revision": session.revision}
                if solution is None:
                    body["solution"] = None
                    body["conflicts"] = conflicts
                else:
                    body["solution"] = solution_record(solution, problem)
                return body
            payload = session_payload(session)
            payload.pop("id", None)
            return payload

    @app.post("/v1/sessions/{session_id}/edits")
    def apply_edit(session_id: str, body: EditBody, response: Response):
        session = find(session_id)
        if session is None:
            response.status_code = 404
            return {"error": "unknown session"}
        with session.lock:
            if body.expected_revision != session.revision:
                response.status_code = 409
                return {
                    "error": "revision mismatch",
                    "expected": body.expected_revision,
                    "actual": session.revision,
                }
            try:
                new_doc, moves = apply_document_edit(
                    session.document, body.edit, session.move_constraints
                )
            except EditError as err:
                response.status_code = 422
                return {"error": err.reason}
            diags = [d for d in speclang.validate(new_doc) if d.severity == "error"]
            if diags:
                response.status_code = 422
                return {
                    "error": "invalid document after edit",
                    "diagnostics": [
                        {"message": d.message, "line": d.span.line, "column": d.span.column}
                        for d in diags
                    ],
                }
            try:
                problem, solution, conflicts = solve_document(
                    new_doc, prev=session.last_solution
                )
            except EditError as err:
                response.status_code = 422
                return {"error": err.reason}
            if solution is None:
                response.status_code = 409
                return {"conflicts": conflicts}
            session.document = new_doc
            session.problem = problem
            session.last_solution = solution
            session.move_constraints = moves
            session.revision += 1
            return {
                "revision": session.revision,
                "solution": solution_record(solution, problem),
            }

    @app.get("/v1/sessions/{session_id}/spec")
    def get_spec(session_id: str, response: Response):
        session = find(session_id)
        if session is None:
            response.status_code = 404
            return {"error": "unknown session"}
        with session.lock:
            return {"spec": speclang.print_document(session.document)}

    @app.delete("/v1/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str, response: Response):
        with registry_lock:
            existed = sessions.pop(session_id, None)
        if existed is None:
            response.status_code = 404
            return {"error": "unknown session"}
        return Response(status_code=204)

    return app


app = create_app()
