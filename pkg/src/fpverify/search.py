"""Depth-first search for counter-examples with five-way domain splitting."""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

from .interval import split5_bounds
from .metrics import PropertyKind, StaticWeights
from .model import DisjunctSet, Model
from .propagate import DomainStore, Propagator, concrete_eval
from .strategy import Selector

SAT, UNSAT, TIMEOUT = "SAT", "UNSAT", "TIMEOUT"


@dataclass(frozen=True)
class SearchConfig:
    kind: PropertyKind = PropertyKind.GLOBAL_OCC
    restrict: bool = False
    u: int = 0
    timeout: float = 60.0
    node_budget: int | None = None
    record_trace: bool = False

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.u < 0:
            raise ValueError("diversify horizon must be non-negative")
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", PropertyKind.parse(self.kind))

    @property
    def features(self) -> str:
        if self.restrict and self.u:
            return "restrict+diversify"
        if self.restrict:
            return "restrict"
        if self.u:
            return "diversify"
        return "baseline"


@dataclass
class SearchStats:
    nodes: int = 0
    fails: int = 0
    max_depth: int = 0
    fallbacks: int = 0
    elapsed: float = 0.0

    def add(self, other: "SearchStats") -> None:
        self.nodes += other.nodes
        self.fails += other.fails
        self.max_depth = max(self.max_depth, other.max_depth)
        self.fallbacks += other.fallbacks
        self.elapsed += other.elapsed


@dataclass
class SearchOutcome:
    verdict: str
    witness: dict[str, float] | None = None
    stats: SearchStats = field(default_factory=SearchStats)
    trace: list[tuple[int, str]] | None = None

    @property
    def nodes(self) -> int:
        return self.stats.nodes


class _Stop(Exception):
    pass


class Search:
    """One single-threaded search over one conjunctive model."""

    def __init__(self, m: Model, cfg: SearchConfig, static: StaticWeights | None = None):
        self.model = m
        self.cfg = cfg
        self.prop = Propagator(m)
        self.selector = Selector(m, cfg.kind, cfg.restrict, cfg.u, static)
        if cfg.record_trace:
            self.selector.trace = []
        self.store = DomainStore.for_model(m)
        self.stats = SearchStats()
        self.witness: dict[str, float] | None = None

    def run(self, deadline: float | None = None, node_budget: int | None = None) -> SearchOutcome:
        start = time.perf_counter()
        self.deadline = deadline if deadline is not None else start + self.cfg.timeout
        self.node_budget = node_budget if node_budget is not None else self.cfg.node_budget
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        try:
            if not self.prop.propagate(self.store).ok:
                self.stats.fails += 1
                verdict = UNSAT
            else:
                verdict = SAT if self._dfs(0) else UNSAT
        except _Stop:
            verdict = TIMEOUT
        finally:
            sys.setrecursionlimit(limit)
        self.stats.fallbacks = self.selector.fallbacks
        self.stats.elapsed = time.perf_counter() - start
        trace = None
        if self.selector.trace is not None:
            names = self.model.variables
            trace = [(d, names[i]) for d, i in self.selector.trace]
        return SearchOutcome(verdict, self.witness, self.stats, trace)

    def _certify(self) -> bool:
        store, m = self.store, self.model
        inputs = {x: store.lb[m.index[x]] for x in m.inputs}
        if concrete_eval(m, inputs):
            self.witness = inputs
            return True
        return False

    def _dfs(self, depth: int) -> bool:
        stats = self.stats
        if depth > stats.max_depth:
            stats.max_depth = depth
        if time.perf_counter() > self.deadline:
            raise _Stop
        if self.node_budget is not None and stats.nodes >= self.node_budget:
            raise _Stop
        sel, store = self.selector, self.store
        smark = sel.mark()
        x = sel.select(store, depth)
        if x is None:
            if self._certify():
                return True
            stats.fails += 1
            return False
        stats.nodes += 1
        seed = self.prop.cstr[x]
        for lo, hi in split5_bounds(store.lb[x], store.ub[x], store.fmt):
            mark = store.mark()
            store.set(x, lo, hi)
            if self.prop.propagate(store, seed).ok:
                if self._dfs(depth + 1):
                    return True
            else:
                stats.fails += 1
            store.restore(mark)
        sel.restore_to(smark)
        return False


def solve(m: Model, cfg: SearchConfig) -> SearchOutcome:
    return Search(m, cfg).run()


def solve_disjuncts(ds: DisjunctSet, cfg: SearchConfig) -> SearchOutcome:
    """Solve each disjunct in turn under one shared time and node budget."""
    start = time.perf_counter()
    deadline = start + cfg.timeout
    total = SearchStats()
    trace: list | None = [] if cfg.record_trace else None
    verdict = UNSAT
    witness = None
    for m in ds:
        budget = None if cfg.node_budget is None else max(cfg.node_budget - total.nodes, 0)
        out = Search(m, cfg).run(deadline, budget)
        total.add(out.stats)
        if trace is not None and out.trace is not None:
            trace.extend(out.trace)
        if out.verdict == SAT:
            verdict, witness = SAT, out.witness
            break
        if out.verdict == TIMEOUT:
            verdict = TIMEOUT
            break
    total.elapsed = time.perf_counter() - start
    return SearchOutcome(verdict, witness, total, trace)
