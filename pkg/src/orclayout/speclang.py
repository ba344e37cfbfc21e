"""The .orc layout-specification language.

Recursive-descent parser to a spanned document AST, a validator, a canonical
pretty-printer (2-space indent, one declaration per line), and lowering to an
assembled LayoutProblem. Parse errors recover to the next ';' or '}' so one
pass reports every diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .model import (
    And,
    Formula,
    LayoutProblem,
    LinExpr,
    Not,
    Or,
    Priority,
    VarId,
    Widget,
    eq,
    ge,
    hard,
    le,
    soft,
)
from . import patterns as pat

DEFAULT_VIEWPORT = (640.0, 480.0)

PATTERN_KINDS = {
    "hflow": "flow_h",
    "vflow": "flow_v",
    "eitherflow": "flow_either",
    "rotate_group": "rotation_group",
    "equalize": "cross_cut_equalize",
    "connected": "connected_flow",
    "balanced": "balanced_flow",
    "alt_positions": "alt_positions",
    "alt_widgets": "alt_widgets",
    "optional": "optional_widget",
    "flow_around": "flow_around_fixed",
}

REF_ATTRS = ("left", "top", "width", "height", "right", "bottom")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


NO_SPAN = SourceSpan(0, 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: SourceSpan
    severity: str = "error"

    def __str__(self):
        return f"{self.span.line}:{self.span.column}: {self.severity}: {self.message}"


class LowerError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics


# -- AST ----------------------------------------------------------------------


@dataclass(frozen=True)
class RefExpr:
    widget: str
    attr: str
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class SignedTerm:
    """One linexpr term: sign * coeff * ref, or a bare signed number."""

    sign: int
    coeff: float
    ref: Optional[RefExpr]
    explicit_coeff: bool = True  # False when the source wrote a bare ref
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class LinAst:
    terms: tuple[SignedTerm, ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class AtomAst:
    lhs: LinAst
    rel: str  # == <= >= < >
    rhs: LinAst
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class NotAst:
    child: "FormulaAst"
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class AndAst:
    children: tuple["FormulaAst", ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class OrAst:
    children: tuple["FormulaAst", ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False)


FormulaAst = Union[AtomAst, NotAst, AndAst, OrAst]


@dataclass(frozen=True)
class Arg:
    name: str
    value: object  # str | float | tuple[float,...] (rect) | tuple[str,...] (ids)
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ViewportDecl:
    width: float
    height: float
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class WidgetDecl:
    name: str
    min: Optional[tuple[float, float]] = None
    pref: Optional[tuple[float, float]] = None
    max: Optional[tuple[float, float]] = None
    priority: Optional[str] = None
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class PatternDecl:
    kind: str
    args: tuple[Arg, ...]
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ConstraintDecl:
    strength: str  # "hard" | "soft"
    weight: Optional[float]
    formula: FormulaAst
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class LayoutDocument:
    name: str
    viewport: Optional[ViewportDecl] = None
    widgets: tuple[WidgetDecl, ...] = ()
    patterns: tuple[PatternDecl, ...] = ()
    constraints: tuple[ConstraintDecl, ...] = ()
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass
class ParseResult:
    document: Optional[LayoutDocument]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.document is not None and not any(
            d.severity == "error" for d in self.diagnostics
        )


# -- lexer --------------------------------------------------------------------

_PUNCT2 = ("||", "&&", "==", "<=", ">=")
_PUNCT1 = "{}()[]:;,.<>!+-*"


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER SIZE STRING PUNCT EOF
    text: str
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(len(self.text), 1))


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "/" and text[i : i + 2] == "//":
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if ch == '"':
            start_line, start_col = line, col
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                elif text[j] == "\n":
                    break
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n or text[j] != '"':
                diags.append(
                    Diagnostic("unterminated string", SourceSpan(start_line, start_col, 1))
                )
                advance(j - i)
                continue
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            advance(j - i + 1)
            continue
        if ch.isdigit():
            start_line, start_col = line, col
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            # NUMxNUM size literal
            if j < n and text[j] == "x" and j + 1 < n and text[j + 1].isdigit():
                k = j + 1
                while k < n and (text[k].isdigit() or text[k] == "."):
                    k += 1
                tokens.append(Token("SIZE", text[i:k], start_line, start_col))
                advance(k - i)
                continue
            tokens.append(Token("NUMBER", text[i:j], start_line, start_col))
            advance(j - i)
            continue
        if ch.isalpha() or ch == "_":
            start_line, start_col = line, col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], start_line, start_col))
            advance(j - i)
            continue
        two = text[i : i + 2]
        if two in _PUNCT2:
            tokens.append(Token("PUNCT", two, line, col))
            advance(2)
            continue
        if ch in _PUNCT1 or ch == "/":
            tokens.append(Token("PUNCT", ch, line, col))
            advance(1)
            continue
        diags.append(Diagnostic(f"unexpected character {ch!r}", SourceSpan(line, col, 1)))
        advance(1)
    tokens.append(Token("EOF", "", line, col))
    return tokens, diags


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]):
        self.tokens = tokens
        self.pos = 0
        self.diags = diagnostics

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def at_punct(self, text: str) -> bool:
        return self.at("PUNCT", text)

    def take(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def error(self, message: str, token: Optional[Token] = None):
        t = token or self.peek()
        self.diags.append(Diagnostic(message, t.span))

    def expect(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            return self.take()
        want = text or kind.lower()
        self.error(f"expected {want!r}, found {self.peek().text or 'end of input'!r}")
        return None

    def recover(self):
        """Skip to just past the next ';' or to the next '}'."""
        while not self.at("EOF"):
            if self.at_punct(";"):
                self.take()
                return
            if self.at_punct("}"):
                return
            self.take()

    # declarations ---------------------------------------------------------

    def document(self) -> Optional[LayoutDocument]:
        start = self.peek()
        if not self.expect("IDENT", "layout"):
            return None
        name_tok = self.expect("STRING")
        if name_tok is None:
            return None
        if not self.expect("PUNCT", "{"):
            return None
        viewport = None
        widgets: list[WidgetDecl] = []
        pats: list[PatternDecl] = []
        constraints: list[ConstraintDecl] = []
        while not self.at_punct("}") and not self.at("EOF"):
            t = self.peek()
            if t.kind != "IDENT":
                self.error(f"expected a declaration, found {t.text!r}")
                self.recover()
                continue
            if t.text == "window":
                v = self.viewport_decl()
                if v is not None:
                    if viewport is not None:
                        self.error("duplicate window declaration", t)
                    viewport = v
            elif t.text == "widget":
                w = self.widget_decl()
                if w is not None:
                    widgets.append(w)
            elif t.text == "pattern":
                p = self.pattern_decl()
                if p is not None:
                    pats.append(p)
            elif t.text == "constraint":
                c = self.constraint_decl()
                if c is not None:
                    constraints.append(c)
            else:
                self.error(f"unknown declaration {t.text!r}")
                self.recover()
        self.expect("PUNCT", "}")
        return LayoutDocument(
            name=name_tok.text,
            viewport=viewport,
            widgets=tuple(widgets),
            patterns=tuple(pats),
            constraints=tuple(constraints),
            span=start.span,
        )

    def number(self) -> Optional[float]:
        t = self.expect("NUMBER")
        if t is None:
            return None
        try:
            return float(t.text)
        except ValueError:
            self.error(f"bad number {t.text!r}", t)
            return None

    def viewport_decl(self) -> Optional[ViewportDecl]:
        start = self.take()  # window
        if not self.expect("PUNCT", "{"):
            self.recover()
            return None
        fields = {}
        while self.at("IDENT", "width") or self.at("IDENT", "height"):
            key = self.take().text
            if not self.expect("PUNCT", ":"):
                self.recover()
                return None
            value = self.number()
            if value is None:
                self.recover()
                return None
            fields[key] = value
            self.expect("PUNCT", ";")
        if not self.expect("PUNCT", "}"):
            self.recover()
            return None
        if "width" not in fields or "height" not in fields:
            self.error("window needs width and height", start)
            return None
        return ViewportDecl(fields["width"], fields["height"], start.span)

    def size_value(self) -> Optional[tuple[float, float]]:
        t = self.expect("SIZE")
        if t is None:
            return None
        w, h = t.text.split("x", 1)
        return (float(w), float(h))

    def widget_decl(self) -> Optional[WidgetDecl]:
        start = self.take()  # widget
        name_tok = self.expect("IDENT")
        if name_tok is None or not self.expect("PUNCT", "{"):
            self.recover()
            return None
        fields: dict[str, object] = {}
        while self.peek().kind == "IDENT" and self.peek().text in (
            "min",
            "pref",
            "max",
            "priority",
        ):
            key = self.take()
            if not self.expect("PUNCT", ":"):
                self.recover()
                return None
            if key.text == "priority":
                prio = self.expect("IDENT")
                if prio is None:
                    self.recover()
                    return None
                if prio.text not in ("high", "medium", "low"):
                    self.error("priority must be high, medium, or low", prio)
                else:
                    fields["priority"] = prio.text
            else:
                size = self.size_value()
                if size is None:
                    self.recover()
                    return None
                fields[key.text] = size
            self.expect("PUNCT", ";")
        if not self.expect("PUNCT", "}"):
            self.recover()
            return None
        return WidgetDecl(
            name=name_tok.text,
            min=fields.get("min"),
            pref=fields.get("pref"),
            max=fields.get("max"),
            priority=fields.get("priority"),
            span=start.span,
        )

    def pattern_decl(self) -> Optional[PatternDecl]:
        start = self.take()  # pattern
        kind_tok = self.expect("IDENT")
        if kind_tok is None:
            self.recover()
            return None
        if kind_tok.text not in PATTERN_KINDS:
            self.error(f"unknown pattern kind {kind_tok.text!r}", kind_tok)
            self.recover()
            return None
        if not self.expect("PUNCT", "("):
            self.recover()
            return None
        args: list[Arg] = []
        if not self.at_punct(")"):
            while True:
                arg = self.arg()
                if arg is None:
                    self.recover()
                    return None
                args.append(arg)
                if self.at_punct(","):
                    self.take()
                    continue
                break
        if not self.expect("PUNCT", ")"):
            self.recover()
            return None
        self.expect("PUNCT", ";")
        return PatternDecl(kind_tok.text, tuple(args), start.span)

    def arg(self) -> Optional[Arg]:
        name_tok = self.expect("IDENT")
        if name_tok is None or not self.expect("PUNCT", ":"):
            return None
        value = self.value()
        if value is None:
            return None
        return Arg(name_tok.text, value, name_tok.span)

    def value(self):
        t = self.peek()
        if t.kind == "IDENT":
            return self.take().text
        if t.kind == "NUMBER":
            return self.number()
        if self.at_punct("("):
            self.take()
            nums = []
            for k in range(4):
                v = self.number()
                if v is None:
                    return None
                nums.append(v)
                if k < 3 and not self.expect("PUNCT", ","):
                    return None
            if not self.expect("PUNCT", ")"):
                return None
            return tuple(nums)
        if self.at_punct("["):
            self.take()
            ids = []
            while True:
                ident = self.expect("IDENT")
                if ident is None:
                    return None
                ids.append(ident.text)
                if self.at_punct(","):
                    self.take()
                    continue
                break
            if not self.expect("PUNCT", "]"):
                return None
            return tuple(ids)
        self.error(f"expected a value, found {t.text!r}")
        return None

    def constraint_decl(self) -> Optional[ConstraintDecl]:
        start = self.take()  # constraint
        strength_tok = self.expect("IDENT")
        if strength_tok is None or strength_tok.text not in ("hard", "soft"):
            self.error("constraint strength must be 'hard' or 'soft'", strength_tok or start)
            self.recover()
            return None
        weight = None
        if strength_tok.text == "soft":
            if not self.expect("PUNCT", "("):
                self.recover()
                return None
            negative = False
            weight_tok = self.peek()
            if self.at_punct("-"):
                self.take()
                negative = True
            w = self.number()
            if w is None:
                self.recover()
                return None
            weight = -w if negative else w
            if weight <= 0:
                self.error("weight must be positive", weight_tok)
                self.recover()
                return None
            if not self.expect("PUNCT", ")"):
                self.recover()
                return None
        if not self.expect("PUNCT", ":"):
            self.recover()
            return None
        f = self.formula()
        if f is None:
            self.recover()
            return None
        self.expect("PUNCT", ";")
        return ConstraintDecl(strength_tok.text, weight, f, start.span)

    # formulas ---------------------------------------------------------------

    def formula(self) -> Optional[FormulaAst]:
        start = self.peek()
        first = self.conj()
        if first is None:
            return None
        children = [first]
        while self.at_punct("||"):
            self.take()
            nxt = self.conj()
            if nxt is None:
                return None
            children.append(nxt)
        if len(children) == 1:
            return first
        return OrAst(tuple(children), start.span)

    def conj(self) -> Optional[FormulaAst]:
        start = self.peek()
        first = self.unary()
        if first is None:
            return None
        children = [first]
        while self.at_punct("&&"):
            self.take()
            nxt = self.unary()
            if nxt is None:
                return None
            children.append(nxt)
        if len(children) == 1:
            return first
        return AndAst(tuple(children), start.span)

    def unary(self) -> Optional[FormulaAst]:
        if self.at_punct("!"):
            bang = self.take()
            child = self.unary()
            if child is None:
                return None
            return NotAst(child, bang.span)
        if self.at_punct("("):
            self.take()
            inner = self.formula()
            if inner is None:
                return None
            if not self.expect("PUNCT", ")"):
                return None
            return inner
        return self.atom()

    def atom(self) -> Optional[AtomAst]:
        start = self.peek()
        lhs = self.linexpr()
        if lhs is None:
            return None
        rel_tok = self.peek()
        if rel_tok.kind == "PUNCT" and rel_tok.text in ("==", "<=", ">=", "<", ">"):
            self.take()
        else:
            self.error(f"expected a relation, found {rel_tok.text!r}")
            return None
        rhs = self.linexpr()
        if rhs is None:
            return None
        return AtomAst(lhs, rel_tok.text, rhs, start.span)

    def linexpr(self) -> Optional[LinAst]:
        start = self.peek()
        first = self.term(1)
        if first is None:
            return None
        terms = [first]
        while self.at_punct("+") or self.at_punct("-"):
            sign = 1 if self.take().text == "+" else -1
            nxt = self.term(sign)
            if nxt is None:
                return None
            terms.append(nxt)
        return LinAst(tuple(terms), start.span)

    def term(self, sign: int) -> Optional[SignedTerm]:
        t = self.peek()
        if t.kind == "NUMBER":
            coeff = self.number()
            if coeff is None:
                return None
            if self.at_punct("*"):
                self.take()
                ref = self.ref()
                if ref is None:
                    return None
                return SignedTerm(sign, coeff, ref, True, t.span)
            return SignedTerm(sign, coeff, None, True, t.span)
        ref = self.ref()
        if ref is None:
            return None
        return SignedTerm(sign, 1.0, ref, False, t.span)

    def ref(self) -> Optional[RefExpr]:
        name_tok = self.expect("IDENT")
        if name_tok is None or not self.expect("PUNCT", "."):
            return None
        attr_tok = self.expect("IDENT")
        if attr_tok is None:
            return None
        if attr_tok.text not in REF_ATTRS:
            self.error(f"unknown attribute {attr_tok.text!r}", attr_tok)
            return None
        return RefExpr(name_tok.text, attr_tok.text, name_tok.span)


def parse(text: str) -> ParseResult:
    """Parse .orc source; returns the document or error diagnostics."""
    tokens, diags = tokenize(text)
    parser = _Parser(tokens, diags)
    doc = parser.document()
    if not parser.at("EOF"):
        parser.error("trailing input after document")
    errors = [d for d in parser.diags if d.severity == "error"]
    if errors:
        return ParseResult(None, parser.diags)
    return ParseResult(doc, parser.diags)


def parse_formula(text: str) -> tuple[Optional[FormulaAst], list[Diagnostic]]:
    """Parse a bare constraint formula (service add_constraint edits)."""
    tokens, diags = tokenize(text)
    parser = _Parser(tokens, diags)
    f = parser.formula()
    if not parser.at("EOF"):
        parser.error("trailing input after formula")
    errors = [d for d in parser.diags if d.severity == "error"]
    if errors:
        return None, parser.diags
    return f, parser.diags


# -- printer ------------------------------------------------------------------


def _fmt_num(v: float) -> str:
    return f"{v:g}"


def _fmt_size(s: tuple[float, float]) -> str:
    return f"{_fmt_num(s[0])}x{_fmt_num(s[1])}"


def _fmt_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, float):
        return _fmt_num(v)
    if isinstance(v, tuple) and v and isinstance(v[0], str):
        return "[" + ", ".join(v) + "]"
    return "(" + ", ".join(_fmt_num(n) for n in v) + ")"


def _fmt_term(t: SignedTerm, first: bool) -> str:
    if t.ref is None:
        body = _fmt_num(t.coeff)
    elif not t.explicit_coeff:
        body = f"{t.ref.widget}.{t.ref.attr}"
    else:
        body = f"{_fmt_num(t.coeff)}*{t.ref.widget}.{t.ref.attr}"
    if first:
        return body
    return ("+ " if t.sign > 0 else "- ") + body


def _fmt_linexpr(e: LinAst) -> str:
    return " ".join(_fmt_term(t, i == 0) for i, t in enumerate(e.terms))


def _fmt_formula(f: FormulaAst, parent: str = "or") -> str:
    if isinstance(f, AtomAst):
        return f"{_fmt_linexpr(f.lhs)} {f.rel} {_fmt_linexpr(f.rhs)}"
    if isinstance(f, NotAst):
        child = _fmt_formula(f.child, "not")
        if isinstance(f.child, (AndAst, OrAst)):
            child = f"({child})"
        return f"!{child}"
    if isinstance(f, AndAst):
        text = " && ".join(_fmt_formula(c, "and") for c in f.children)
        return f"({text})" if parent == "not" else text
    text = " || ".join(_fmt_formula(c, "or") for c in f.children)
    if parent in ("and", "not"):
        return f"({text})"
    return text


def print_document(doc: LayoutDocument) -> str:
    """Canonical form: 2-space indent, one declaration per line."""
    lines = [f'layout "{doc.name}" {{']
    if doc.viewport is not None:
        lines.append(
            f"  window {{ width: {_fmt_num(doc.viewport.width)}; "
            f"height: {_fmt_num(doc.viewport.height)}; }}"
        )
    for w in doc.widgets:
        fields = []
        if w.min is not None:
            fields.append(f"min: {_fmt_size(w.min)};")
        if w.pref is not None:
            fields.append(f"pref: {_fmt_size(w.pref)};")
        if w.max is not None:
            fields.append(f"max: {_fmt_size(w.max)};")
        if w.priority is not None:
            fields.append(f"priority: {w.priority};")
        body = " ".join(fields)
        lines.append(f"  widget {w.name} {{ {body} }}" if body else f"  widget {w.name} {{ }}")
    for p in doc.patterns:
        args = ", ".join(f"{a.name}: {_fmt_value(a.value)}" for a in p.args)
        lines.append(f"  pattern {p.kind}({args});")
    for c in doc.constraints:
        strength = "hard" if c.strength == "hard" else f"soft({_fmt_num(c.weight)})"
        lines.append(f"  constraint {strength}: {_fmt_formula(c.formula)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- validation and lowering ---------------------------------------------------


_ARG_SCHEMAS = {
    # kind -> (required, optional); values checked loosely by lowering
    "hflow": (("items",), ("container",)),
    "vflow": (("items",), ("container",)),
    "eitherflow": (("items",), ("container",)),
    "rotate_group": (("group", "children"), ()),
    "equalize": (("items",), ()),
    "connected": (("items", "top", "left"), ("widget_width", "window_width")),
    "balanced": (("items",), ("container",)),
    "alt_positions": (("target", "slot"), ()),
    "alt_widgets": (("primary", "fallback"), ()),
    "optional": (("target",), ("priority",)),
    "flow_around": (("items", "fixed"), ("container",)),
}


def _formula_refs(f: FormulaAst):
    if isinstance(f, AtomAst):
        for side in (f.lhs, f.rhs):
            for t in side.terms:
                if t.ref is not None:
                    yield t.ref
    elif isinstance(f, NotAst):
        yield from _formula_refs(f.child)
    else:
        for c in f.children:
            yield from _formula_refs(c)


def validate(doc: LayoutDocument) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for w in doc.widgets:
        if w.name in seen:
            diags.append(Diagnostic(f"duplicate widget {w.name!r}", w.span))
        seen.add(w.name)
        if w.pref is None:
            diags.append(Diagnostic(f"widget {w.name!r} needs a pref size", w.span))
            continue
        lo = w.min or (0.0, 0.0)
        hi = w.max or (float("inf"),) * 2
        for axis in (0, 1):
            if not (0 <= lo[axis] <= w.pref[axis] <= hi[axis]):
                diags.append(
                    Diagnostic(f"widget {w.name!r}: min <= pref <= max violated", w.span)
                )
                break

    def check_ids(ids, span):
        for wid in ids:
            if wid not in seen:
                diags.append(Diagnostic(f"unknown widget {wid!r}", span))

    for p in doc.patterns:
        schema = _ARG_SCHEMAS[p.kind]
        names = [a.name for a in p.args]
        for req in schema[0]:
            if req not in names:
                diags.append(Diagnostic(f"pattern {p.kind!r} needs argument {req!r}", p.span))
        allowed = set(schema[0]) | set(schema[1])
        for a in p.args:
            if a.name not in allowed:
                diags.append(Diagnostic(f"pattern {p.kind!r}: unknown argument {a.name!r}", a.span))
        for a in p.args:
            if a.name in ("items", "children"):
                if not (isinstance(a.value, tuple) and a.value and isinstance(a.value[0], str)):
                    diags.append(Diagnostic(f"argument {a.name!r} needs a widget list", a.span))
                else:
                    check_ids(a.value, a.span)
            if a.name in ("group", "target", "primary", "fallback") and isinstance(a.value, str):
                check_ids([a.value], a.span)
            if a.name == "container" and isinstance(a.value, str) and a.value != "root":
                check_ids([a.value], a.span)
    for c in doc.constraints:
        for ref in _formula_refs(c.formula):
            if ref.widget not in seen:
                diags.append(Diagnostic(f"unknown widget {ref.widget!r}", ref.span))
    return diags


def _lin_to_model(e: LinAst) -> LinExpr:
    out = LinExpr.const(0.0)
    for t in e.terms:
        if t.ref is None:
            out = out + t.sign * t.coeff
            continue
        wid = t.ref.widget
        if t.ref.attr == "right":
            expr = LinExpr.var(VarId(wid, "left")) + LinExpr.var(VarId(wid, "width"))
        elif t.ref.attr == "bottom":
            expr = LinExpr.var(VarId(wid, "top")) + LinExpr.var(VarId(wid, "height"))
        else:
            expr = LinExpr.var(VarId(wid, t.ref.attr))
        out = out + expr * (t.sign * t.coeff)
    return out


def _formula_to_model(f: FormulaAst, epsilon: float) -> Formula:
    if isinstance(f, AtomAst):
        lhs, rhs = _lin_to_model(f.lhs), _lin_to_model(f.rhs)
        if f.rel == "==":
            return eq(lhs, rhs)
        if f.rel == "<=":
            return le(lhs, rhs)
        if f.rel == ">=":
            return ge(lhs, rhs)
        if f.rel == "<":
            return le(lhs, rhs - epsilon)
        return ge(lhs, rhs + epsilon)
    if isinstance(f, NotAst):
        return Not(_formula_to_model(f.child, epsilon))
    if isinstance(f, AndAst):
        return And(tuple(_formula_to_model(c, epsilon) for c in f.children))
    return Or(tuple(_formula_to_model(c, epsilon) for c in f.children))


def document_widgets(doc: LayoutDocument) -> list[Widget]:
    out = []
    for w in doc.widgets:
        out.append(
            Widget(
                w.name,
                pref=w.pref or (0.0, 0.0),
                min=w.min or (0.0, 0.0),
                max=w.max,
                priority=Priority(w.priority) if w.priority else Priority.MEDIUM,
            )
        )
    return out


def document_instances(doc: LayoutDocument) -> list[pat.PatternInstance]:
    instances = []
    for i, p in enumerate(doc.patterns):
        args: dict[str, object] = {}
        slots: list[tuple] = []
        for a in p.args:
            if a.name == "slot":
                slots.append(a.value)
            else:
                args[a.name] = a.value
        kind = PATTERN_KINDS[p.kind]
        if kind in ("flow_h", "flow_v", "flow_either", "balanced_flow"):
            targets = tuple(args["items"])
            params = {"container": args.get("container")}
        elif kind == "rotation_group":
            targets = tuple(args["children"])
            params = {"group": args["group"]}
        elif kind == "cross_cut_equalize":
            targets = tuple(args["items"])
            params = {}
        elif kind == "connected_flow":
            targets = tuple(args["items"])
            params = {
                "top": args["top"],
                "left": args["left"],
                "widget_width": args.get("widget_width"),
                "window_width": args.get("window_width"),
            }
        elif kind == "alt_positions":
            targets = (args["target"],)
            params = {"slots": slots}
        elif kind == "alt_widgets":
            targets = (args["primary"], args["fallback"])
            params = {}
        elif kind == "optional_widget":
            targets = (args["target"],)
            params = {"priority": args.get("priority")} if args.get("priority") else {}
        else:  # flow_around_fixed
            targets = tuple(args["items"])
            params = {"fixed": args["fixed"], "container": args.get("container")}
        instances.append(
            pat.PatternInstance(kind, targets, params, label_prefix=f"p{i}:{p.kind}:")
        )
    return instances


def lower(
    doc: LayoutDocument,
    viewport: Optional[tuple[float, float]] = None,
    epsilon: float = 1.0,
    weights: pat.Weights = pat.DEFAULT_WEIGHTS,
) -> LayoutProblem:
    """Compile a validated document into an assembled LayoutProblem.

    `viewport` overrides the document's window declaration (what-if solving
    and multi-viewport rendering)."""
    diags = validate(doc)
    if diags:
        raise LowerError(diags)
    if viewport is None:
        if doc.viewport is not None:
            viewport = (doc.viewport.width, doc.viewport.height)
        else:
            viewport = DEFAULT_VIEWPORT
    widgets = document_widgets(doc)
    instances = document_instances(doc)
    raw = []
    for i, c in enumerate(doc.constraints):
        f = _formula_to_model(c.formula, epsilon)
        if c.strength == "hard":
            raw.append(hard(f"c{i+1}", f))
        else:
            raw.append(soft(f"c{i+1}", f, float(c.weight)))
    return pat.compile(instances, widgets, viewport, epsilon, weights, extra_clauses=raw)
