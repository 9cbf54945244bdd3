"""Closed intervals of finite floats and the five-way split."""
from __future__ import annotations

from dataclasses import dataclass

from .fpbits import BINARY32, FloatFormat, FloatDomainError


@dataclass(frozen=True)
class FpInterval:
    lb: float
    ub: float
    fmt: FloatFormat = BINARY32

    def __post_init__(self):
        lb, ub = self.lb + 0.0, self.ub + 0.0
        if not (self.fmt.is_member(lb) and self.fmt.is_member(ub)):
            raise FloatDomainError(f"bounds [{self.lb!r}, {self.ub!r}] are not finite {self.fmt.name} floats")
        if lb > ub:
            raise ValueError(f"empty interval [{lb!r}, {ub!r}]")
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @classmethod
    def full(cls, fmt: FloatFormat = BINARY32) -> "FpInterval":
        return cls(-fmt.max_finite, fmt.max_finite, fmt)

    @classmethod
    def point(cls, v: float, fmt: FloatFormat = BINARY32) -> "FpInterval":
        return cls(v, v, fmt)

    @property
    def is_point(self) -> bool:
        return self.lb == self.ub

    def __contains__(self, v: float) -> bool:
        return self.lb <= v <= self.ub

    def __iter__(self):
        fmt = self.fmt
        for k in range(fmt.ord(self.lb), fmt.ord(self.ub) + 1):
            yield fmt.from_ord(k)

    def __str__(self) -> str:
        return f"[{self.lb!r}, {self.ub!r}]"


def width(iv: FpInterval) -> float:
    """``ub - lb`` rounded to nearest; saturates at the largest finite float."""
    w = iv.fmt.op("-", iv.ub, iv.lb)
    return min(w, iv.fmt.max_finite)


def card_bounds(lb: float, ub: float, fmt: FloatFormat) -> int:
    return fmt.ord(ub) - fmt.ord(lb) + 1


def card(iv: FpInterval) -> int:
    return iv.fmt.ord(iv.ub) - iv.fmt.ord(iv.lb) + 1


def intersect(a: FpInterval, b: FpInterval) -> FpInterval | None:
    """Common part of two intervals, or None when they are disjoint."""
    if a.fmt is not b.fmt:
        raise ValueError("intervals of different formats")
    lb, ub = max(a.lb, b.lb), min(a.ub, b.ub)
    if lb > ub:
        return None
    return FpInterval(lb, ub, a.fmt)


def midpoint(lb: float, ub: float, fmt: FloatFormat) -> float:
    """Rounded mean of the bounds, kept at least two floats away from each end.

    Requires at least five floats between ``lb`` and ``ub`` inclusive.
    """
    mid = fmt.round(fmt.op("*", lb, 0.5) + fmt.op("*", ub, 0.5))
    k, klo, khi = fmt.ord(mid), fmt.ord(lb) + 2, fmt.ord(ub) - 2
    if k < klo:
        return fmt.from_ord(klo)
    if k > khi:
        return fmt.from_ord(khi)
    return mid


def split5_bounds(lb: float, ub: float, fmt: FloatFormat) -> list[tuple[float, float]]:
    n = fmt.ord(ub) - fmt.ord(lb) + 1
    if n <= 5:
        k0 = fmt.ord(lb)
        pts = [fmt.from_ord(k0 + i) for i in range(n)]
        return [(v, v) for v in pts]
    mid = midpoint(lb, ub, fmt)
    return [
        (lb, lb),
        (mid, mid),
        (ub, ub),
        (fmt.next_up(lb), fmt.next_down(mid)),
        (fmt.next_up(mid), fmt.next_down(ub)),
    ]


def split5(iv: FpInterval) -> list[FpInterval]:
    """Children L, Mid, U, [L+, Mid-], [Mid+, U-] (point children when card <= 5).

    With more than five floats both open sub-intervals are non-empty.
    """
    return [FpInterval(a, b, iv.fmt) for a, b in split5_bounds(iv.lb, iv.ub, iv.fmt)]
