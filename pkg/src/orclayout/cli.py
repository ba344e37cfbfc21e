"""The orc command line: solve, bench, serve, fmt."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from . import speclang
from .model import LayoutError
from .patterns import PatternError
from .render import DEFAULT_THEME, render_svg, solution_record
from .solver import HardInfeasible, solve

log = logging.getLogger("orc")


def _setup_logging():
    level = os.environ.get("ORC_LOG", "warn").lower()
    numeric = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "warning": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }.get(level, logging.WARNING)
    logging.basicConfig(level=numeric, format="%(levelname)s %(name)s: %(message)s")


def _parse_viewport(text: str) -> tuple[float, float]:
    w, _, h = text.partition("x")
    try:
        return (float(w), float(h))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad viewport {text!r}, expected WxH")


def _load_document(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: cannot read {path}: {err.strerror}", file=sys.stderr)
        return None
    result = speclang.parse(text)
    if result.document is None:
        for d in result.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        return None
    diags = speclang.validate(result.document)
    if diags:
        for d in diags:
            print(f"{path}:{d}", file=sys.stderr)
        return None
    return result.document


def cmd_solve(args) -> int:
    doc = _load_document(args.spec)
    if doc is None:
        return 1
    viewports = args.viewport or [None]
    budget = args.timeout_ms / 1000.0 if args.timeout_ms else None
    records = []
    svgs = []
    any_truncated = False
    for vp in viewports:
        try:
            problem = speclang.lower(doc, viewport=vp)
            solution = solve(problem, budget=budget)
        except HardInfeasible as err:
            print(
                f"error: hard constraints infeasible; conflicting: {', '.join(err.labels)}",
                file=sys.stderr,
            )
            return 1
        except (speclang.LowerError, PatternError, LayoutError, TimeoutError) as err:
            print(f"error: {err}", file=sys.stderr)
            return 1
        if not solution.optimal:
            any_truncated = True
        record = {"viewport": {"width": problem.viewport[0], "height": problem.viewport[1]}}
        record.update(solution_record(solution, problem, include_time=False))
        records.append(record)
        svgs.append((problem.viewport, render_svg(solution, problem, DEFAULT_THEME)))
    if args.json:
        Path(args.json).write_text(json.dumps(records, indent=2) + "\n", encoding="utf-8")
    else:
        print(json.dumps(records, indent=2))
    if args.svg_dir:
        out = Path(args.svg_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(args.spec).stem
        for (vw, vh), svg in svgs:
            (out / f"{stem}_{vw:g}x{vh:g}.svg").write_text(svg, encoding="utf-8")
    return 2 if any_truncated else 0


def cmd_bench(args) -> int:
    counts = [int(v) for v in args.widgets.split(",") if v]
    ops = []
    for op in args.ops.split(","):
        op = op.strip()
        if not op:
            continue
        ops.append("resize_widget" if op == "resize" else op)
    for op in ops:
        if op not in bench_mod.OPS:
            print(f"error: unknown op {op!r}", file=sys.stderr)
            return 1
    rows = bench_mod.run_bench(counts, ops, repeats=args.repeats, progress=log.info)
    csv = bench_mod.rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(csv, encoding="utf-8")
    else:
        print(csv, end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(snapshot_dir=args.snapshot_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_fmt(args) -> int:
    doc = _load_document(args.spec)
    if doc is None:
        return 1
    text = speclang.print_document(doc)
    if args.write:
        Path(args.spec).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orc", description="OR-constraint layout engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a .orc spec at one or more viewports")
    p_solve.add_argument("spec")
    p_solve.add_argument(
        "--viewport", action="append", type=_parse_viewport, metavar="WxH"
    )
    p_solve.add_argument("--json", metavar="PATH")
    p_solve.add_argument("--svg-dir", metavar="DIR")
    p_solve.add_argument("--timeout-ms", type=int, default=None, metavar="N")
    p_solve.set_defaults(func=cmd_solve)

    p_bench = sub.add_parser("bench", help="fresh vs incremental timing benchmark")
    p_bench.add_argument("--widgets", default="5,10,20,30")
    p_bench.add_argument("--ops", default="insert,delete,move,resize,resize_window")
    p_bench.add_argument("--repeats", type=int, default=10)
    p_bench.add_argument("--out", metavar="CSV")
    p_bench.set_defaults(func=cmd_bench)

    p_serve = sub.add_parser("serve", help="run the HTTP layout service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--snapshot-dir", default=os.environ.get("ORC_SNAPSHOT_DIR"))
    p_serve.set_defaults(func=cmd_serve)

    p_fmt = sub.add_parser("fmt", help="canonically format a .orc spec")
    p_fmt.add_argument("spec")
    p_fmt.add_argument("--write", action="store_true", help="rewrite the file in place")
    p_fmt.set_defaults(func=cmd_fmt)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
