"""Constraint models and their derivation from parsed programs.

A program is compiled in SSA style: every assignment introduces a fresh
state variable and one assignment constraint.  Assumptions become ordinary
constraints, and the conjunction of all assertions is negated and expanded
into disjunctive normal form, giving one conjunctive model per disjunct.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .expr import (
    And, BoolExpr, Cmp, DisjunctionLimit, Expr, Or, Var, dnf, leaves, negate, render_expr, substitute, var_names,
)
from .fpbits import FloatFormat
from .interval import FpInterval
from .parser import Assign, Assume, ParsedProgram


class DerivationError(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    """``lhs op rhs``; ``op`` is ``=`` for an assignment ``var = expr``."""

    lhs: Expr
    op: str
    rhs: Expr
    source: str = "body"

    @property
    def is_assignment(self) -> bool:
        return self.op == "="

    @cached_property
    def vars(self) -> tuple[str, ...]:
        seen = dict.fromkeys(var_names(self.lhs))
        seen.update(dict.fromkeys(var_names(self.rhs)))
        return tuple(seen)

    def __str__(self) -> str:
        return f"{render_expr(self.lhs)} {self.op} {render_expr(self.rhs)}"


def assignment(target: str, e: Expr) -> Constraint:
    return Constraint(Var(target), "=", e, "body")


def count_occ(x: str, c: Constraint) -> int:
    """Number of leaf references to ``x`` on both sides of ``c``."""
    return sum(1 for leaf in leaves(c.lhs) if leaf == Var(x)) + sum(
        1 for leaf in leaves(c.rhs) if leaf == Var(x)
    )


@dataclass(frozen=True, eq=False)
class Model:
    fmt: FloatFormat
    variables: tuple[str, ...]
    domains: tuple[FpInterval, ...]
    constraints: tuple[Constraint, ...]
    inputs: tuple[str, ...]
    output: str | None = None

    def __post_init__(self):
        if len(self.domains) != len(self.variables):
            raise ValueError("one domain per variable is required")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        if not self.inputs:
            raise ValueError("at least one input variable is required")
        known = set(self.variables)
        for name in self.inputs:
            if name not in known:
                raise ValueError(f"input {name!r} is not a variable")
        for c in self.constraints:
            for name in c.vars:
                if name not in known:
                    raise ValueError(f"constraint {c} uses unknown variable {name!r}")

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.variables)}

    @cached_property
    def input_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.index[n] for n in self.inputs))

    @cached_property
    def cstr(self) -> tuple[tuple[int, ...], ...]:
        """Constraint indices per variable index."""
        out: list[list[int]] = [[] for _ in self.variables]
        for ci, c in enumerate(self.constraints):
            for name in c.vars:
                out[self.index[name]].append(ci)
        return tuple(tuple(x) for x in out)

    def lex(self, x: str) -> int:
        return self.index[x] + 1

    def domain(self, x: str) -> FpInterval:
        return self.domains[self.index[x]]

    @property
    def temporaries(self) -> tuple[str, ...]:
        ins = set(self.inputs)
        return tuple(v for v in self.variables if v not in ins)

    def assignments(self) -> list[Constraint]:
        return [c for c in self.constraints if c.is_assignment]

    def is_ssa(self) -> bool:
        """Every non-input is assigned exactly once, after its operands."""
        defined = set(self.inputs)
        targets = []
        for c in self.assignments():
            if not isinstance(c.lhs, Var) or c.lhs.name in defined:
                return False
            if any(n not in defined for n in var_names(c.rhs)):
                return False
            defined.add(c.lhs.name)
            targets.append(c.lhs.name)
        return defined == set(self.variables)


def degree(x: str, m: Model) -> int:
    return sum(1 for c in m.constraints if x in c.vars)


@dataclass(frozen=True)
class DisjunctSet:
    models: tuple[Model, ...]
    program: ParsedProgram | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.models)

    def __iter__(self):
        return iter(self.models)


def _ssa_name(base: str, k: int) -> str:
    return base if k == 0 else f"{base}@{k}"


def derive(program: ParsedProgram, cap: int = 64) -> DisjunctSet:
    fmt = program.format
    current: dict[str, str] = {}
    versions: dict[str, int] = {}
    variables: list[str] = []
    domains: list[FpInterval] = []
    inputs: list[str] = []
    body: list[Constraint] = []
    pre: list[BoolExpr] = []
    posts: list[BoolExpr] = []

    for d in program.decls:
        if d.name in current:
            raise DerivationError(f"duplicate input {d.name!r}")
        current[d.name] = d.name
        variables.append(d.name)
        domains.append(FpInterval(d.lb, d.ub, fmt))
        inputs.append(d.name)

    def rename(names) -> dict[str, str]:
        for n in names:
            if n not in current:
                raise DerivationError(f"use of undeclared variable {n!r}")
        return current

    last_assigned = None
    for s in program.stmts:
        if isinstance(s, Assign):
            e = substitute(s.expr, rename(var_names(s.expr)))
            if s.target in inputs:
                raise DerivationError(f"assignment to input variable {s.target!r}")
            k = versions.get(s.target, -1) + 1
            name = _ssa_name(s.target, k)
            while name in current.values() or name in inputs:
                k += 1
                name = _ssa_name(s.target, k)
            versions[s.target] = k
            current[s.target] = name
            variables.append(name)
            domains.append(FpInterval.full(fmt))
            body.append(assignment(name, e))
            last_assigned = name
        else:
            cond = _rename_bool(s.cond, rename)
            (pre if isinstance(s, Assume) else posts).append(cond)

    if not posts:
        raise DerivationError("program has no assert")

    try:
        pre_dnf = dnf(And(tuple(pre)), cap) if pre else [()]
        post_dnf = dnf(Or(tuple(negate(p) for p in posts)), cap)
    except DisjunctionLimit as e:
        raise DerivationError(f"negated post-condition expands to {e}") from None
    if len(pre_dnf) * len(post_dnf) > cap:
        raise DerivationError(f"negated post-condition expands to more than {cap} disjuncts")

    output = last_assigned
    if len(posts) == 1 and isinstance(posts[0], Cmp):
        for side in (posts[0].left, posts[0].right):
            if isinstance(side, Var):
                output = side.name
                break

    models = []
    for p in pre_dnf:
        for q in post_dnf:
            cs = list(body)
            cs += [Constraint(c.left, c.op, c.right, "pre") for c in p]
            cs += [Constraint(c.left, c.op, c.right, "post") for c in q]
            models.append(Model(fmt, tuple(variables), tuple(domains), tuple(cs), tuple(inputs), output))
    return DisjunctSet(tuple(models), program)


def _rename_bool(b: BoolExpr, rename) -> BoolExpr:
    if isinstance(b, Cmp):
        names = rename(list(var_names(b.left)) + list(var_names(b.right)))
        return Cmp(b.op, substitute(b.left, names), substitute(b.right, names))
    return type(b)(tuple(_rename_bool(i, rename) for i in b.items))
