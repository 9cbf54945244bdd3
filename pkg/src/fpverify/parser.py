"""Recursive-descent parser for the ``.fpv`` verification language.

Example::

    format single;
    input x in [-3.0, 3.0];
    y = x * x;
    assume(y > 1.0);
    assert(y < 9.0);
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .expr import (
    And, BinOp, BoolExpr, CMP_OPS, Cmp, Expr, Lit, Neg, Or, Var,
    fmt_float, render_bool, render_expr,
)
from .fpbits import FORMATS, FloatFormat


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class InputDecl:
    name: str
    lb: float
    ub: float


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr


@dataclass(frozen=True)
class Assume:
    cond: BoolExpr


@dataclass(frozen=True)
class Assert:
    cond: BoolExpr


Stmt = Union[Assign, Assume, Assert]


@dataclass(frozen=True)
class ParsedProgram:
    fmt: str
    decls: tuple[InputDecl, ...]
    stmts: tuple[Stmt, ...]

    @property
    def format(self) -> FloatFormat:
        return FORMATS[self.fmt]


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<hex>0[xX](?P<hi>[0-9a-fA-F]*)(?:\.(?P<hf>[0-9a-fA-F]*))?[pP](?P<he>[+-]?\d+)[fF]?)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[fF]?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||==|!=|<=|>=|[<>=+\-*/()\[\],;])
    """,
    re.VERBOSE,
)

KEYWORDS = {"format", "input", "in", "assume", "assert"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    value: Fraction | None = None


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup if m.lastgroup in ("ws", "num", "name", "op") else "hex"
        s = m.group(0)
        if kind == "hex":
            digits = (m.group("hi") or "") + (m.group("hf") or "")
            if not digits:
                raise ParseError(f"malformed hex float {s!r}", line, col)
            shift = int(m.group("he")) - 4 * len(m.group("hf") or "")
            toks.append(_Tok("num", s, line, col, Fraction(int(digits, 16)) * Fraction(2) ** shift))
        elif kind == "num":
            toks.append(_Tok("num", s, line, col, Fraction(s.rstrip("fF"))))
        elif kind == "name":
            toks.append(_Tok("kw" if s in KEYWORDS else "name", s, line, col))
        elif kind == "op":
            toks.append(_Tok("op", s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.fmt: FloatFormat = FORMATS["single"]
        self.known: set[str] = set()
        self.inputs: set[str] = set()

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    def name(self) -> _Tok:
        tok = self.tok
        if tok.kind != "name":
            self.error(f"expected a name, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def literal(self, tok: _Tok, q: Fraction) -> float:
        v = self.fmt.round_rational(q)
        if not math.isfinite(v):
            self.error(f"literal {tok.text} overflows {self.fmt.name}", tok)
        return v

    # -- grammar --------------------------------------------------------

    def program(self) -> ParsedProgram:
        if self.accept("format"):
            tok = self.name()
            if tok.text not in FORMATS:
                self.error(f"unknown format {tok.text!r}", tok)
            self.fmt = FORMATS[tok.text]
            self.expect(";")
        decls = []
        while self.accept("input"):
            decls.append(self.decl())
        stmts = []
        while self.tok.kind != "eof":
            stmts.append(self.stmt())
        if not any(isinstance(s, Assert) for s in stmts):
            self.error("no assert")
        if not decls:
            self.error("no input declaration")
        return ParsedProgram(self.fmt.name, tuple(decls), tuple(stmts))

    def signed_literal(self) -> float:
        neg = self.accept("-")
        tok = self.tok
        if tok.kind != "num":
            self.error(f"expected a number, found {tok.text or 'end of input'!r}")
        self.i += 1
        return self.literal(tok, -tok.value if neg else tok.value)

    def decl(self) -> InputDecl:
        tok = self.name()
        if tok.text in self.known:
            self.error(f"duplicate name {tok.text!r}", tok)
        self.expect("in")
        self.expect("[")
        lb = self.signed_literal()
        self.expect(",")
        ub = self.signed_literal()
        self.expect("]")
        self.expect(";")
        if lb > ub:
            self.error(f"empty domain for {tok.text!r}", tok)
        self.known.add(tok.text)
        self.inputs.add(tok.text)
        return InputDecl(tok.text, lb, ub)

    def stmt(self) -> Stmt:
        if self.accept("assume"):
            self.expect("(")
            cond = self.bexpr()
            self.expect(")")
            self.expect(";")
            return Assume(cond)
        if self.accept("assert"):
            self.expect("(")
            cond = self.bexpr()
            self.expect(")")
            self.expect(";")
            return Assert(cond)
        tok = self.name()
        if tok.text in self.inputs:
            self.error(f"assignment to input {tok.text!r}", tok)
        self.expect("=")
        e = self.expr()
        self.expect(";")
        self.known.add(tok.text)
        return Assign(tok.text, e)

    def bexpr(self) -> BoolExpr:
        items = [self.bconj()]
        while self.accept("||"):
            items.append(self.bconj())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def bconj(self) -> BoolExpr:
        items = [self.batom()]
        while self.accept("&&"):
            items.append(self.batom())
        return items[0] if len(items) == 1 else And(tuple(items))

    def batom(self) -> BoolExpr:
        if self.tok.text == "(":
            save = self.i
            self.i += 1
            try:
                inner = self.bexpr()
                self.expect(")")
                if self.tok.text not in CMP_OPS:
                    return inner
            except ParseError:
                pass
            self.i = save
        left = self.expr()
        op = self.tok
        if op.kind != "op" or op.text not in CMP_OPS:
            self.error(f"expected a comparison, found {op.text or 'end of input'!r}")
        self.i += 1
        right = self.expr()
        return Cmp(op.text, left, right)

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.accept("-"):
            arg = self.unary()
            if isinstance(arg, Lit):
                return Lit(-arg.value + 0.0)
            return Neg(arg)
        return self.primary()

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Lit(self.literal(tok, tok.value))
        if tok.kind == "name":
            self.i += 1
            if tok.text not in self.known:
                self.error(f"undeclared name {tok.text!r}", tok)
            return Var(tok.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse(text: str) -> ParsedProgram:
    return _Parser(text).program()


def parse_file(path) -> ParsedProgram:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def render(program: ParsedProgram) -> str:
    """Canonical source text; literals are written as hex floats."""
    out = [f"format {program.fmt};"]
    for d in program.decls:
        out.append(f"input {d.name} in [{fmt_float(d.lb)}, {fmt_float(d.ub)}];")
    for s in program.stmts:
        if isinstance(s, Assign):
            out.append(f"{s.target} = {render_expr(s.expr)};")
        elif isinstance(s, Assume):
            out.append(f"assume({render_bool(s.cond)});")
        else:
            out.append(f"assert({render_bool(s.cond)});")
    return "\n".join(out) + "\n"

