"""Variable weights used by the selection heuristics.

Dynamic properties (width, card, density, absorption) read the current
domains; static ones (lex, degree, local and global occurrences) depend on
the constraint structure only and are computed once per model.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .expr import BinOp, Var
from .fpbits import FloatFormat
from .interval import FpInterval, card, width
from .model import Model, count_occ, degree

DENSITY_SENTINEL = math.inf


class PropertyKind(enum.Enum):
    WIDTH = "width"
    CARD = "card"
    DENSITY = "density"
    ABSORPTION = "absorption"
    LEX = "lex"
    DEGREE = "degree"
    LOCAL_OCC = "localocc"
    GLOBAL_OCC = "globalocc"

    @property
    def dynamic(self) -> bool:
        return self in (PropertyKind.WIDTH, PropertyKind.CARD, PropertyKind.DENSITY, PropertyKind.ABSORPTION)

    @classmethod
    def parse(cls, name: str) -> "PropertyKind":
        key = name.strip().lower()
        aliases = {"maxdens": "density", "maxcard": "card", "maxwidth": "width",
                   "maxabs": "absorption", "maxdeg": "degree", "dens": "density"}
        return cls(aliases.get(key, key))


STRATEGIES = tuple(PropertyKind)


def density(iv: FpInterval):
    """card / width as an exact rational; a sentinel for singletons."""
    return density_bounds(iv.lb, iv.ub, iv.fmt)


def density_bounds(lb: float, ub: float, fmt: FloatFormat):
    if lb == ub:
        return DENSITY_SENTINEL
    w = fmt.op("-", ub, lb)
    if w > fmt.max_finite:
        w = fmt.max_finite
    return Fraction(fmt.ord(ub) - fmt.ord(lb) + 1) / Fraction(w)


def absorption_threshold(x: FpInterval) -> float:
    """2^(e_max - p - 1), with e_max the exponent of max(|lb|, |ub|)."""
    fmt = x.fmt
    e_max = fmt.exponent(max(abs(x.lb), abs(x.ub)))
    return math.ldexp(1.0, e_max - fmt.abs_p - 1)


def absorb_bounds(xl: float, xh: float, yl: float, yh: float, fmt: FloatFormat) -> Fraction:
    e_max = fmt.exponent(max(abs(xl), abs(xh)))
    t = math.ldexp(1.0, e_max - fmt.abs_p - 1)
    # largest float not above the threshold
    if t < fmt.min_subnormal:
        t = 0.0
    else:
        t = fmt.round(t)
    lo, hi = max(-t, yl), min(t, yh)
    total = fmt.ord(yh) - fmt.ord(yl) + 1
    if lo > hi:
        return Fraction(0)
    return Fraction(fmt.ord(hi) - fmt.ord(lo) + 1, total)


def absorb(x: FpInterval, y: FpInterval) -> Fraction:
    """Fraction of ``y``'s floats lying inside ``x``'s absorption threshold."""
    return absorb_bounds(x.lb, x.ub, y.lb, y.ub, x.fmt)


def absorption_pairs(m: Model) -> list[list[int]]:
    """Per variable, the partners ``y`` of every ``x +/- y`` node with two variable operands."""
    pairs: list[list[int]] = [[] for _ in m.variables]
    stack = []
    for c in m.constraints:
        stack.extend((c.lhs, c.rhs))
    while stack:
        e = stack.pop()
        if isinstance(e, BinOp):
            if e.op in "+-" and isinstance(e.left, Var) and isinstance(e.right, Var):
                a, b = m.index[e.left.name], m.index[e.right.name]
                if a != b:
                    pairs[a].append(b)
                    pairs[b].append(a)
            stack.extend((e.left, e.right))
        elif hasattr(e, "arg"):
            stack.append(e.arg)
    return pairs


def absorption(x: str, m: Model, domains=None) -> Fraction:
    """Max of absorb(x, y) over additive constraints pairing x with y; 0 if none."""
    doms = list(domains) if domains is not None else list(m.domains)
    i = m.index[x]
    best = Fraction(0)
    for j in absorption_pairs(m)[i]:
        best = max(best, absorb(doms[i], doms[j]))
    return best


def local_occ(x: str, m: Model) -> int:
    return max((count_occ(x, c) for c in m.constraints if x in c.vars), default=0)


def global_occ(x: str, m: Model) -> int:
    return sum(count_occ(x, c) for c in m.constraints if x in c.vars)


@dataclass(frozen=True)
class StaticWeights:
    lex: tuple[int, ...]
    degree: tuple[int, ...]
    occ_l: tuple[int, ...]
    occ_g: tuple[int, ...]

    @classmethod
    def of(cls, m: Model) -> "StaticWeights":
        xs = m.variables
        return cls(
            tuple(m.lex(x) for x in xs),
            tuple(degree(x, m) for x in xs),
            tuple(local_occ(x, m) for x in xs),
            tuple(global_occ(x, m) for x in xs),
        )

    def table(self, m: Model) -> list[dict]:
        return [
            {"var": x, "lex": self.lex[i], "degree": self.degree[i],
             "occ_l": self.occ_l[i], "occ_g": self.occ_g[i]}
            for i, x in enumerate(m.variables)
        ]


def weight(kind: PropertyKind, x: str, m: Model, domains=None, static: StaticWeights | None = None):
    """Weight of ``x`` under ``kind``; larger is preferred (lex is negated)."""
    doms = list(domains) if domains is not None else list(m.domains)
    i = m.index[x]
    iv = doms[i]
    if kind is PropertyKind.WIDTH:
        return width(iv)
    if kind is PropertyKind.CARD:
        return card(iv)
    if kind is PropertyKind.DENSITY:
        return density(iv)
    if kind is PropertyKind.ABSORPTION:
        return absorption(x, m, doms)
    static = static or StaticWeights.of(m)
    if kind is PropertyKind.LEX:
        return -static.lex[i]
    if kind is PropertyKind.DEGREE:
        return static.degree[i]
    if kind is PropertyKind.LOCAL_OCC:
        return static.occ_l[i]
    return static.occ_g[i]
