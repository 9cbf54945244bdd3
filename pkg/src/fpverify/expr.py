"""Expression trees shared by the DSL front-end and the constraint model."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    value: float


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


Expr = Union[Var, Lit, Neg, BinOp]

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
NEGATED = {"==": "!=", "!=": "==", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
SWAPPED = {"==": "==", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


@dataclass(frozen=True)
class Cmp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


BoolExpr = Union[Cmp, And, Or]


def leaves(e: Expr) -> Iterator[Expr]:
    """Yield Var and Lit leaves left to right."""
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, BinOp):
            stack.append(n.right)
            stack.append(n.left)
        elif isinstance(n, Neg):
            stack.append(n.arg)
        else:
            yield n


def var_names(e: Expr) -> Iterator[str]:
    for leaf in leaves(e):
        if isinstance(leaf, Var):
            yield leaf.name


def substitute(e: Expr, names: dict[str, str]) -> Expr:
    if isinstance(e, Var):
        return Var(names.get(e.name, e.name))
    if isinstance(e, Lit):
        return e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, names))
    return BinOp(e.op, substitute(e.left, names), substitute(e.right, names))


def negate(b: BoolExpr) -> BoolExpr:
    """Logical negation pushed down to comparisons (De Morgan)."""
    if isinstance(b, Cmp):
        return Cmp(NEGATED[b.op], b.left, b.right)
    if isinstance(b, And):
        return Or(tuple(negate(i) for i in b.items))
    return And(tuple(negate(i) for i in b.items))


class DisjunctionLimit(ValueError):
    pass


def dnf(b: BoolExpr, cap: int = 64) -> list[tuple[Cmp, ...]]:
    """Disjunctive normal form as a list of conjunctions of comparisons."""
    if isinstance(b, Cmp):
        return [(b,)]
    if isinstance(b, Or):
        out = []
        for item in b.items:
            out.extend(dnf(item, cap))
            if len(out) > cap:
                raise DisjunctionLimit(f"more than {cap} disjuncts")
        return out
    acc: list[tuple[Cmp, ...]] = [()]
    for item in b.items:
        acc = [x + y for x in acc for y in dnf(item, cap)]
        if len(acc) > cap:
            raise DisjunctionLimit(f"more than {cap} disjuncts")
    return acc


def fmt_float(v: float) -> str:
    return float.hex(v)


def render_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Lit):
        return fmt_float(e.value)
    if isinstance(e, Neg):
        return f"-({render_expr(e.arg)})"
    return f"({render_expr(e.left)} {e.op} {render_expr(e.right)})"


def render_bool(b: BoolExpr) -> str:
    if isinstance(b, Cmp):
        return f"{render_expr(b.left)} {b.op} {render_expr(b.right)}"
    sep = " && " if isinstance(b, And) else " || "
    return "(" + sep.join(render_bool(i) for i in b.items) + ")"
