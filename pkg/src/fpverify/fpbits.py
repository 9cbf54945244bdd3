"""Bit-level helpers for IEEE-754 style binary formats.

Every value handled by the solver is stored as a Python ``float``.  Values of
the single and mock formats are exactly representable as doubles, so a
format is only needed to decide rounding, neighbours and the integer ranks
used for counting.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property


class FloatDomainError(ValueError):
    """Raised for NaN or infinite input where a finite float is required."""


class FloatRangeError(ArithmeticError):
    """Raised when stepping past the largest finite float."""


@dataclass(frozen=True)
class FloatDecomp:
    sign: int
    exponent: int
    mantissa: int
    implicit: int = 1


@dataclass(frozen=True)
class FloatFormat:
    """A binary floating-point format with round-to-nearest-even semantics.

    ``p`` is the stored fraction width.  ``abs_p`` is the mantissa-length
    constant used by the absorption heuristic (23 single, 53 double).
    """

    name: str
    p: int
    e_min: int
    e_max_fmt: int
    abs_p: int

    def __post_init__(self):
        if self.e_min >= self.e_max_fmt:
            raise ValueError("e_min must be below e_max_fmt")

    @cached_property
    def max_finite(self) -> float:
        return math.ldexp((1 << (self.p + 1)) - 1, self.e_max_fmt - self.p)

    @cached_property
    def min_subnormal(self) -> float:
        return math.ldexp(1.0, self.e_min - self.p)

    @cached_property
    def rel_slack(self) -> float:
        return math.ldexp(1.0, 1 - self.p)

    @cached_property
    def min_normal(self) -> float:
        return math.ldexp(1.0, self.e_min)

    @cached_property
    def max_ord(self) -> int:
        return self.ord(self.max_finite)

    # -- rounding -------------------------------------------------------

    def round_rational(self, q: Fraction) -> float:
        """Round an exact rational to the nearest float, ties to even.

        Returns a signed infinity on overflow.
        """
        if q == 0:
            return 0.0
        sign = -1.0 if q < 0 else 1.0
        a = abs(q)
        e = a.numerator.bit_length() - a.denominator.bit_length()
        if Fraction(2) ** e > a:
            e -= 1
        e = max(e, self.e_min)
        quantum = Fraction(2) ** (e - self.p)
        k = round(a / quantum)
        r = k * quantum
        if r > self.max_finite:
            return sign * math.inf
        return sign * float(r) + 0.0

    def round(self, x: float) -> float:
        if x != x or x in (math.inf, -math.inf):
            return x
        return self.round_rational(Fraction(x)) + 0.0

    def op(self, kind: str, a: float, b: float) -> float:
        """Correctly rounded ``a kind b``; non-finite results are returned as is."""
        if kind == "/" and b == 0:
            return math.nan
        fa, fb = Fraction(a), Fraction(b)
        if kind == "+":
            q = fa + fb
        elif kind == "-":
            q = fa - fb
        elif kind == "*":
            q = fa * fb
        elif kind == "/":
            q = fa / fb
        else:
            raise ValueError(f"unknown operator {kind!r}")
        return self.round_rational(q)

    # -- ranks and neighbours ------------------------------------------

    def is_member(self, v: float) -> bool:
        """True when ``v`` is a finite value of this format."""
        if not math.isfinite(v):
            return False
        return abs(v) <= self.max_finite and self.round(v) == v

    def ord(self, v: float) -> int:
        if not math.isfinite(v):
            raise FloatDomainError(f"ord of non-finite value {v!r}")
        a = abs(v)
        if a < self.min_normal:
            k = int(math.ldexp(a, self.p - self.e_min))
        else:
            m, e = math.frexp(a)
            e -= 1
            k = (e - self.e_min + 1) * (1 << self.p) + int(math.ldexp(m, self.p + 1)) - (1 << self.p)
        return -k if v < 0 else k

    def from_ord(self, k: int) -> float:
        a = abs(k)
        if a > self.max_ord:
            raise FloatRangeError(f"rank {k} outside {self.name}")
        idx, m = divmod(a, 1 << self.p)
        if idx == 0:
            v = math.ldexp(m, self.e_min - self.p)
        else:
            v = math.ldexp((1 << self.p) + m, self.e_min + idx - 1 - self.p)
        return -v if k < 0 else v

    def next_up(self, v: float) -> float:
        return self.from_ord(self.ord(v) + 1)

    def next_down(self, v: float) -> float:
        return self.from_ord(self.ord(v) - 1)

    def decompose(self, v: float) -> FloatDecomp:
        if not math.isfinite(v):
            raise FloatDomainError(f"cannot decompose {v!r}")
        sign = -1 if v < 0 else 1
        k = abs(self.ord(v))
        idx, m = divmod(k, 1 << self.p)
        if idx == 0:
            return FloatDecomp(sign, self.e_min, m, 0)
        return FloatDecomp(sign, self.e_min + idx - 1, m, 1)

    def recompose(self, d: FloatDecomp) -> float:
        v = math.ldexp((d.implicit << self.p) + d.mantissa, d.exponent - self.p)
        return -v if d.sign < 0 else v

    def exponent(self, v: float) -> int:
        """Unbiased exponent of ``v``; ``e_min`` for zero and subnormals."""
        a = abs(v)
        if a < self.min_normal:
            return self.e_min
        return math.frexp(a)[1] - 1


_F32 = struct.Struct("<f")
_U32 = struct.Struct("<I")
_F64 = struct.Struct("<d")
_U64 = struct.Struct("<Q")


class _Binary32(FloatFormat):
    def round(self, x: float) -> float:
        try:
            return _F32.unpack(_F32.pack(x))[0] + 0.0
        except OverflowError:
            return math.copysign(math.inf, x)

    def op(self, kind: str, a: float, b: float) -> float:
        # Double rounding through binary64 is innocuous for + - * / on binary32.
        if kind == "+":
            r = a + b
        elif kind == "-":
            r = a - b
        elif kind == "*":
            r = a * b
        elif kind == "/":
            if b == 0:
                return math.nan
            r = a / b
        else:
            raise ValueError(f"unknown operator {kind!r}")
        return self.round(r)

    def ord(self, v: float) -> int:
        if v != v or v in (math.inf, -math.inf):
            raise FloatDomainError(f"ord of non-finite value {v!r}")
        bits = _U32.unpack(_F32.pack(v))[0]
        k = bits & 0x7FFFFFFF
        return -k if bits >> 31 else k

    def from_ord(self, k: int) -> float:
        if k > 0x7F7FFFFF or k < -0x7F7FFFFF:
            raise FloatRangeError(f"rank {k} outside {self.name}")
        if k < 0:
            return _F32.unpack(_U32.pack(0x80000000 | -k))[0]
        return _F32.unpack(_U32.pack(k))[0]


class _Binary64(FloatFormat):
    def round(self, x: float) -> float:
        return x + 0.0

    def op(self, kind: str, a: float, b: float) -> float:
        if kind == "+":
            return a + b + 0.0
        if kind == "-":
            return a - b + 0.0
        if kind == "*":
            return a * b + 0.0
        if kind == "/":
            if b == 0:
                return math.nan
            return a / b + 0.0
        raise ValueError(f"unknown operator {kind!r}")

    def ord(self, v: float) -> int:
        if v != v or v in (math.inf, -math.inf):
            raise FloatDomainError(f"ord of non-finite value {v!r}")
        bits = _U64.unpack(_F64.pack(v))[0]
        k = bits & 0x7FFFFFFFFFFFFFFF
        return -k if bits >> 63 else k

    def from_ord(self, k: int) -> float:
        if abs(k) > 0x7FEFFFFFFFFFFFFF:
            raise FloatRangeError(f"rank {k} outside {self.name}")
        if k < 0:
            return _F64.unpack(_U64.pack((1 << 63) | -k))[0]
        return _F64.unpack(_U64.pack(k))[0]


class _Narrow(FloatFormat):
    """Formats whose values and exact +, -, * results all fit in binary64.

    Requires ``2 * (p + 1) + 2 <= 53`` so that rounding a binary64 quotient
    again gives the correctly rounded result.
    """

    def __post_init__(self):
        super().__post_init__()
        if 2 * (self.p + 1) + 2 > 53 or self.e_max_fmt > 500 or self.e_min < -500:
            raise ValueError(f"format {self.name!r} is too wide for binary64 arithmetic")
        object.__setattr__(self, "_memo", {})

    def round(self, x: float) -> float:
        # the solver rounds the same few thousand values over and over
        memo = self._memo
        r = memo.get(x)
        if r is None:
            r = self._round(x)
            if len(memo) > 1 << 18:
                memo.clear()
            memo[x] = r
        return r

    def _round(self, x: float) -> float:
        if x != x or x in (math.inf, -math.inf):
            return x
        if x == 0:
            return 0.0
        e = max(math.frexp(x)[1] - 1, self.e_min)
        r = math.ldexp(round(math.ldexp(x, self.p - e)), e - self.p)  # round() breaks ties to even
        if abs(r) > self.max_finite:
            return math.copysign(math.inf, x)
        return r + 0.0

    def op(self, kind: str, a: float, b: float) -> float:
        if kind == "+":
            r = a + b
        elif kind == "-":
            r = a - b
        elif kind == "*":
            r = a * b
        elif kind == "/":
            if b == 0:
                return math.nan
            r = a / b
        else:
            raise ValueError(f"unknown operator {kind!r}")
        return self.round(r)


BINARY32 = _Binary32("single", 23, -126, 127, 23)
BINARY64 = _Binary64("double", 52, -1022, 1023, 53)
# Tiny format for exhaustive oracles: 3 fraction bits, 111 finite values.
MOCK = _Narrow("mock", 3, -2, 3, 3)

FORMATS = {f.name: f for f in (BINARY32, BINARY64, MOCK)}


def canonical(v: float) -> float:
    """Map -0.0 to +0.0; leaves every other float unchanged."""
    return v + 0.0


def ord(v: float, fmt: FloatFormat = BINARY32) -> int:  # noqa: A001
    return fmt.ord(v)


def next_up(v: float, fmt: FloatFormat = BINARY32) -> float:
    return fmt.next_up(v)


def next_down(v: float, fmt: FloatFormat = BINARY32) -> float:
    return fmt.next_down(v)


def decompose(v: float, fmt: FloatFormat = BINARY32) -> FloatDecomp:
    return fmt.decompose(v)


def enumerate_floats(fmt: FloatFormat, lo: float | None = None, hi: float | None = None):
    """Yield every float of ``fmt`` in ``[lo, hi]`` in increasing order."""
    a = fmt.ord(lo) if lo is not None else -fmt.max_ord
    b = fmt.ord(hi) if hi is not None else fmt.max_ord
    for k in range(a, b + 1):
        yield fmt.from_ord(k)
