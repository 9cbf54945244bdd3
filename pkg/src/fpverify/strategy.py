"""Variable selection: argmax over a property, input restriction, prohibition depths."""
from __future__ import annotations

from .fpbits import FloatFormat
from .metrics import (
    PropertyKind, StaticWeights, absorb_bounds, absorption_pairs, density_bounds,
)
from .model import Model
from .propagate import DomainStore


class StaleMarkError(RuntimeError):
    pass


def clamp_horizon(u: int, m: Model, restrict: bool) -> int:
    if u < 0:
        raise ValueError("horizon must be non-negative")
    universe = len(m.inputs) if restrict else len(m.variables)
    return min(u, universe)


class Selector:
    """Selection state for one search: weights, restriction and prohibition depths.

    ``last[i]`` is the depth up to which variable ``i`` may not be re-selected;
    every change is trailed so backtracking can restore it.
    """

    def __init__(self, m: Model, kind: PropertyKind, restrict: bool = False, u: int = 0,
                 static: StaticWeights | None = None):
        self.model = m
        self.kind = kind
        self.restrict = restrict
        self.u = clamp_horizon(u, m, restrict)
        self.static = static or StaticWeights.of(m)
        self.universe = m.input_indices if restrict else tuple(range(len(m.variables)))
        self.last = [0] * len(m.variables)
        self.trail: list[tuple[int, int]] = []
        self.fallbacks = 0
        self.trace: list[tuple[int, int]] | None = None
        self._pairs = absorption_pairs(m) if kind is PropertyKind.ABSORPTION else None
        s = self.static
        self._static_w = {
            PropertyKind.LEX: [-v for v in s.lex],
            PropertyKind.DEGREE: list(s.degree),
            PropertyKind.LOCAL_OCC: list(s.occ_l),
            PropertyKind.GLOBAL_OCC: list(s.occ_g),
        }.get(kind)

    def mark(self) -> int:
        return len(self.trail)

    def restore_to(self, mark: int) -> None:
        if mark > len(self.trail):
            raise StaleMarkError(f"mark {mark} beyond trail of length {len(self.trail)}")
        trail, last = self.trail, self.last
        while len(trail) > mark:
            i, old = trail.pop()
            last[i] = old

    def candidates(self, store: DomainStore, depth: int) -> list[int]:
        """Unbound universe members; prohibited ones are dropped unless none remain."""
        lb, ub = store.lb, store.ub
        free = [i for i in self.universe if lb[i] != ub[i]]
        if self.u and free:
            last = self.last
            allowed = [i for i in free if last[i] <= depth]
            if not allowed:
                self.fallbacks += 1
                return free
            return allowed
        return free

    def weight(self, i: int, store: DomainStore):
        if self._static_w is not None:
            return self._static_w[i]
        fmt: FloatFormat = store.fmt
        lo, hi = store.lb[i], store.ub[i]
        kind = self.kind
        if kind is PropertyKind.DENSITY:
            return density_bounds(lo, hi, fmt)
        if kind is PropertyKind.CARD:
            return fmt.ord(hi) - fmt.ord(lo)
        if kind is PropertyKind.WIDTH:
            return min(fmt.op("-", hi, lo), fmt.max_finite)
        best = 0
        for j in self._pairs[i]:
            best = max(best, absorb_bounds(lo, hi, store.lb[j], store.ub[j], fmt))
        return best

    def select(self, store: DomainStore, depth: int) -> int | None:
        """Index of the branching variable, or None when every candidate is bound.

        Ties go to the earliest declared variable.
        """
        cands = self.candidates(store, depth)
        if not cands:
            return None
        best, best_w = cands[0], self.weight(cands[0], store)
        for i in cands[1:]:
            w = self.weight(i, store)
            if w > best_w:
                best, best_w = i, w
        self.trail.append((best, self.last[best]))
        self.last[best] = depth + self.u
        if self.trace is not None:
            self.trace.append((depth, best))
        return best
