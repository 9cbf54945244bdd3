"""Interval propagation over floating-point semantics.

Forward projections return the exact hull of the rounded results; backward
projections invert the real operation on the rounding preimage of the result
with outward rounding and one extra ulp of slack, so they never drop a
feasible float.  Constraint trees are revised HC4-style: a forward sweep
computes every node's range, the root comparison is enforced, and a backward
sweep narrows the children down to the variable leaves.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .expr import BinOp, Lit, Neg, Var
from .fpbits import FloatFormat
from .interval import FpInterval
from .model import Constraint, Model

_INF = math.inf

VAR, CONST, NEG, ADD, SUB, MUL, DIV = range(7)
_OPCODE = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}
_CMPCODE = {"=": "==", "==": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


# -- forward ------------------------------------------------------------

def _clamp(lo, hi, fmt):
    m = fmt.max_finite
    if lo > m or hi < -m:
        return None
    if lo < -m:
        lo = -m
    if hi > m:
        hi = m
    return lo, hi


def _fwd(code, al, ah, bl, bh, fmt):
    # + - * computed in binary64 then rounded are correctly rounded for every
    # supported format (exact for the mock format, innocuous double rounding
    # for single); division goes through the format's own operation.
    rnd = fmt.round
    if code == ADD:
        return _clamp(rnd(al + bl), rnd(ah + bh), fmt)
    if code == SUB:
        return _clamp(rnd(al - bh), rnd(ah - bl), fmt)
    if code == MUL:
        c = (al * bl, al * bh, ah * bl, ah * bh)
        return _clamp(rnd(min(c)), rnd(max(c)), fmt)
    # division: the divisor never takes the value zero
    if bl == 0.0 and bh == 0.0:
        return None
    op = fmt.op
    parts = []
    tiny = fmt.min_subnormal
    if bh > 0.0:
        parts.append((max(bl, tiny), bh))
    if bl < 0.0:
        parts.append((bl, min(bh, -tiny)))
    lo, hi = _INF, -_INF
    for dl, dh in parts:
        c = (op("/", al, dl), op("/", al, dh), op("/", ah, dl), op("/", ah, dh))
        lo = min(lo, *c)
        hi = max(hi, *c)
    return _clamp(lo + 0.0, hi + 0.0, fmt)


# -- backward (real arithmetic, outward rounding) -----------------------

def _down(x):
    return math.nextafter(x, -_INF) if -_INF < x < _INF else x


def _up(x):
    return math.nextafter(x, _INF) if -_INF < x < _INF else x


def _mul0(x, y):
    # bound arithmetic: an infinite bound is never attained, so 0 * inf = 0
    if x == 0.0 or y == 0.0:
        return 0.0
    return x * y


def _rmul(al, ah, bl, bh):
    c = (_mul0(al, bl), _mul0(al, bh), _mul0(ah, bl), _mul0(ah, bh))
    return _down(min(c)), _up(max(c))


def _rdiv(nl, nh, dl, dh):
    """Hull of ``n / d`` over reals with ``d != 0``; None if ``d`` is only zero."""
    if dl > 0.0 or dh < 0.0:
        c = (nl / dl, nl / dh, nh / dl, nh / dh)
        return _down(min(c)), _up(max(c))
    if dl == 0.0 and dh == 0.0:
        return None
    if nl == 0.0 and nh == 0.0:
        return 0.0, 0.0
    if dl == 0.0:  # d in (0, dh]
        if nl >= 0.0:
            return _down(nl / dh), _INF
        if nh <= 0.0:
            return -_INF, _up(nh / dh)
        return -_INF, _INF
    if dh == 0.0:  # d in [dl, 0)
        if nl >= 0.0:
            return -_INF, _up(nl / dl)
        if nh <= 0.0:
            return _down(nh / dl), _INF
        return -_INF, _INF
    return -_INF, _INF


def _preimage(zl, zh, fmt):
    """Real interval enclosing every value that rounds into ``[zl, zh]``.

    Widens each bound by twice the relative unit roundoff plus the smallest
    subnormal, which covers one ulp plus the binary64 rounding of the sum.
    """
    m = fmt.max_finite
    eps, tiny = fmt.rel_slack, fmt.min_subnormal
    lo = zl - (abs(zl) * eps + tiny) if zl > -m else -_INF
    hi = zh + (abs(zh) * eps + tiny) if zh < m else _INF
    return lo, hi


def _bwd(code, zl, zh, kl, kh, fmt, left):
    """Real hull of the operand on side ``left`` given the other operand's range."""
    zl, zh = _preimage(zl, zh, fmt)
    if code == ADD:
        return _down(zl - kh), _up(zh - kl)
    if code == SUB:
        if left:  # z = a - k
            return _down(zl + kl), _up(zh + kh)
        return _down(kl - zh), _up(kh - zl)  # z = k - b
    if code == MUL or not left:
        if kl <= 0.0 <= kh and zl <= 0.0 <= zh:
            # u * 0 = 0 and 0 / u = 0 for every u
            return -_INF, _INF
        if code == MUL:
            return _rdiv(zl, zh, kl, kh)
        return _rdiv(kl, kh, zl, zh)  # z = k / b
    return _rmul(zl, zh, kl, kh)  # z = a / k


def _narrow(rl, rh, cl, ch, fmt):
    """Intersect ``[cl, ch]`` with the real range ``[rl, rh]`` widened to floats.

    Each real bound is pushed out by about one ulp before rounding, so the
    float bound never cuts into ``[rl, rh]``.  Returns None when empty.
    """
    m = fmt.max_finite
    if rl > cl:
        if rl > m:
            return None
        v = fmt.round(rl - (abs(rl) * fmt.rel_slack + fmt.min_subnormal))
        if v > cl:
            cl = v
    if rh < ch:
        if rh < -m:
            return None
        v = fmt.round(rh + (abs(rh) * fmt.rel_slack + fmt.min_subnormal))
        if v < ch:
            ch = v
    if cl > ch:
        return None
    return cl, ch


# -- public projection API ---------------------------------------------

def forward_project(op: str, a: FpInterval, b: FpInterval) -> FpInterval | None:
    """Exact hull of ``{fl(u op v)}``; None when no finite result exists."""
    r = _fwd(_OPCODE[op], a.lb, a.ub, b.lb, b.ub, a.fmt)
    return None if r is None else FpInterval(r[0], r[1], a.fmt)


def backward_project(op: str, z: FpInterval, known: FpInterval, side: str = "left",
                     current: FpInterval | None = None) -> FpInterval | None:
    """Sound enclosure of ``{u : exists v in known, fl(u op v) in z}``.

    ``side`` names the operand being refined; the result is intersected with
    ``current`` (default: every finite float).
    """
    fmt = z.fmt
    cur = current or FpInterval.full(fmt)
    r = _bwd(_OPCODE[op], z.lb, z.ub, known.lb, known.ub, fmt, side == "left")
    if r is None:
        return None
    out = _narrow(r[0], r[1], cur.lb, cur.ub, fmt)
    return None if out is None else FpInterval(out[0], out[1], fmt)


# -- store ----------------------------------------------------------------

class DomainStore:
    """Per-variable bounds with a trail for backtracking."""

    def __init__(self, fmt: FloatFormat, lb: list[float], ub: list[float]):
        self.fmt = fmt
        self.lb = list(lb)
        self.ub = list(ub)
        self.rev = [0] * len(self.lb)
        self.trail: list[tuple[int, float, float]] = []

    @classmethod
    def for_model(cls, m: Model) -> "DomainStore":
        return cls(m.fmt, [d.lb for d in m.domains], [d.ub for d in m.domains])

    def __len__(self) -> int:
        return len(self.lb)

    def set(self, i: int, lo: float, hi: float) -> None:
        self.trail.append((i, self.lb[i], self.ub[i]))
        self.lb[i] = lo
        self.ub[i] = hi
        self.rev[i] += 1

    def mark(self) -> int:
        return len(self.trail)

    def restore(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            i, lo, hi = trail.pop()
            self.lb[i] = lo
            self.ub[i] = hi
            self.rev[i] += 1

    def interval(self, i: int) -> FpInterval:
        return FpInterval(self.lb[i], self.ub[i], self.fmt)

    def is_bound(self, i: int) -> bool:
        return self.lb[i] == self.ub[i]

    def snapshot(self) -> list[tuple[float, float]]:
        return list(zip(self.lb, self.ub))


@dataclass(frozen=True)
class PropagationResult:
    ok: bool
    changed: frozenset = frozenset()

    @property
    def outcome(self) -> str:
        return "fixpoint" if self.ok else "failure"


# -- compiled constraints ---------------------------------------------------

class _Compiled:
    __slots__ = ("nodes", "left", "right", "cmp")

    def __init__(self, c: Constraint, index: dict[str, int]):
        self.nodes: list[tuple] = []
        self.left = self._emit(c.lhs, index)
        self.right = self._emit(c.rhs, index)
        self.cmp = _CMPCODE[c.op]

    def _emit(self, e, index) -> int:
        if isinstance(e, Var):
            node = (VAR, index[e.name], None)
        elif isinstance(e, Lit):
            node = (CONST, e.value, None)
        elif isinstance(e, Neg):
            node = (NEG, self._emit(e.arg, index), None)
        elif isinstance(e, BinOp):
            a = self._emit(e.left, index)
            b = self._emit(e.right, index)
            node = (_OPCODE[e.op], a, b)
        else:
            raise TypeError(f"not an expression: {e!r}")
        self.nodes.append(node)
        return len(self.nodes) - 1


def _tighten(cmp, ll, lh, rl, rh, fmt):
    """Enforce ``L cmp R`` on the two root ranges; None when infeasible."""
    if cmp == "==":
        lo, hi = max(ll, rl), min(lh, rh)
        if lo > hi:
            return None
        return lo, hi, lo, hi
    if cmp in (">", ">="):
        r = _tighten("<" if cmp == ">" else "<=", rl, rh, ll, lh, fmt)
        return None if r is None else (r[2], r[3], r[0], r[1])
    if cmp == "<=":
        lh = min(lh, rh)
        rl = max(rl, ll)
    elif cmp == "<":
        m = fmt.max_finite
        if rh <= -m or ll >= m:
            return None
        lh = min(lh, fmt.next_down(rh))
        rl = max(rl, fmt.next_up(ll))
    else:  # !=
        if ll == lh:
            if rl == ll:
                if rl == rh:
                    return None
                rl = fmt.next_up(rl)
            elif rh == ll:
                rh = fmt.next_down(rh)
        if rl == rh:
            if ll == rl:
                if ll == lh:
                    return None
                ll = fmt.next_up(ll)
            elif lh == rl:
                lh = fmt.next_down(lh)
    if ll > lh or rl > rh:
        return None
    return ll, lh, rl, rh


class Propagator:
    """Fixpoint engine over a model's constraints."""

    def __init__(self, m: Model):
        self.model = m
        self.fmt = m.fmt
        self.compiled = [_Compiled(c, m.index) for c in m.constraints]
        self.cstr = m.cstr
        self.revisions = 0

    def revise(self, ci: int, store: DomainStore) -> list[int] | None:
        """HC4 revision of one constraint; returns changed variables or None."""
        cc = self.compiled[ci]
        fmt = self.fmt
        nodes = cc.nodes
        slb, sub = store.lb, store.ub
        n = len(nodes)
        lo = [0.0] * n
        hi = [0.0] * n
        for i, (k, a, b) in enumerate(nodes):
            if k == VAR:
                lo[i] = slb[a]
                hi[i] = sub[a]
            elif k == CONST:
                lo[i] = hi[i] = a
            elif k == NEG:
                lo[i] = -hi[a] + 0.0
                hi[i] = -lo[a] + 0.0
            else:
                r = _fwd(k, lo[a], hi[a], lo[b], hi[b], fmt)
                if r is None:
                    return None
                lo[i], hi[i] = r
        L, R = cc.left, cc.right
        t = _tighten(cc.cmp, lo[L], hi[L], lo[R], hi[R], fmt)
        if t is None:
            return None
        flo, fhi = lo[:], hi[:]
        lo[L], hi[L], lo[R], hi[R] = t
        changed = []
        for i in range(n - 1, -1, -1):
            if lo[i] == flo[i] and hi[i] == fhi[i]:
                # the forward range is an exact hull of the children, so an
                # unchanged node cannot narrow them
                continue
            k, a, b = nodes[i]
            if k == VAR:
                cl, ch = slb[a], sub[a]
                nl = lo[i] if lo[i] > cl else cl
                nh = hi[i] if hi[i] < ch else ch
                if nl > nh:
                    return None
                if nl != cl or nh != ch:
                    store.set(a, nl, nh)
                    changed.append(a)
            elif k == CONST:
                if not lo[i] <= a <= hi[i]:
                    return None
            elif k == NEG:
                nl = max(lo[a], -hi[i] + 0.0)
                nh = min(hi[a], -lo[i] + 0.0)
                if nl > nh:
                    return None
                lo[a], hi[a] = nl, nh
            else:
                zl, zh = lo[i], hi[i]
                r = _bwd(k, zl, zh, lo[b], hi[b], fmt, True)
                r = None if r is None else _narrow(r[0], r[1], lo[a], hi[a], fmt)
                if r is None:
                    return None
                lo[a], hi[a] = r
                r = _bwd(k, zl, zh, lo[a], hi[a], fmt, False)
                r = None if r is None else _narrow(r[0], r[1], lo[b], hi[b], fmt)
                if r is None:
                    return None
                lo[b], hi[b] = r
        return changed

    def propagate(self, store: DomainStore, seed=None) -> PropagationResult:
        """Run revisions from a FIFO worklist until no domain changes."""
        cstr = self.cstr
        queue = deque(range(len(self.compiled)) if seed is None else seed)
        queued = [False] * len(self.compiled)
        for ci in queue:
            queued[ci] = True
        changed = set()
        while queue:
            ci = queue.popleft()
            queued[ci] = False
            self.revisions += 1
            out = self.revise(ci, store)
            if out is None:
                return PropagationResult(False, frozenset(changed))
            for v in out:
                changed.add(v)
                for cj in cstr[v]:
                    if not queued[cj]:
                        queued[cj] = True
                        queue.append(cj)
        return PropagationResult(True, frozenset(changed))


def propagate_to_fixpoint(store: DomainStore, m: Model) -> PropagationResult:
    return Propagator(m).propagate(store)


# -- concrete evaluation ----------------------------------------------------

def _eval(e, env, fmt):
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Neg):
        return -_eval(e.arg, env, fmt) + 0.0
    a = _eval(e.left, env, fmt)
    b = _eval(e.right, env, fmt)
    r = fmt.op(e.op, a, b)
    if not math.isfinite(r):
        raise ArithmeticError(f"non-finite result of {a!r} {e.op} {b!r}")
    return r


_CMP = {
    "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


def concrete_eval(m: Model, inputs: dict[str, float]) -> bool:
    """True when ``inputs`` is a counter-example for this model.

    Executes every assignment in order with the model's rounding, then checks
    each pre-condition and negated post-condition on the exact values.
    """
    fmt = m.fmt
    env = {}
    for name in m.inputs:
        v = inputs[name]
        if not fmt.is_member(v) or v not in m.domain(name):
            return False
        env[name] = v + 0.0
    try:
        for c in m.assignments():
            env[c.lhs.name] = _eval(c.rhs, env, fmt)
        for c in m.constraints:
            if not c.is_assignment:
                if not _CMP[c.op](_eval(c.lhs, env, fmt), _eval(c.rhs, env, fmt)):
                    return False
    except ArithmeticError:
        return False
    return True
