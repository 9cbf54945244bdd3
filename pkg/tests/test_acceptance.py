"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict that is printed in the pytest summary
(see conftest.py).  Heavy shared runs (the random mock corpus and the desk
matrix) are computed once per session.
"""
from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest

import conftest
from fpverify.fpbits import BINARY32, MOCK, enumerate_floats, next_up
from fpverify.harness import parse_witness, run_matrix
from fpverify.interval import FpInterval, card, split5
from fpverify.metrics import STRATEGIES, PropertyKind, global_occ, local_occ
from fpverify.model import derive
from fpverify.parser import parse_file
from fpverify.propagate import DomainStore, concrete_eval, forward_project
from fpverify.search import SAT, TIMEOUT, Search, SearchConfig, solve_disjuncts
from fpverify.strategy import Selector

from test_model import occurrence_system
from tinygen import brute_force, corpus

BENCH = Path(__file__).resolve().parents[1] / "src" / "fpverify" / "benchmarks"
DESK = sorted(BENCH.glob("*.fpv"))
CONFIGS = [(k, r, u) for k in STRATEGIES for r in (False, True) for u in (0, 2)]

# every SAT outcome produced here, re-checked by the witness criterion
SAT_OUTCOMES: list[tuple[str, object, dict]] = []


def record(n: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _desk(name):
    return derive(parse_file(BENCH / name))


# -- shared runs -------------------------------------------------------------

@pytest.fixture(scope="session")
def tiny_runs():
    """Brute-force truth and all 32 configurations on 200 random mock models."""
    start = time.perf_counter()
    models = corpus(200)
    runs = []
    for src, ds in models:
        truth = brute_force(ds)
        outs = {}
        for k, r, u in CONFIGS:
            out = solve_disjuncts(ds, SearchConfig(k, r, u, timeout=600.0))
            outs[(k, r, u)] = out
            if out.verdict == SAT:
                SAT_OUTCOMES.append((src, ds, out.witness))
        runs.append((src, ds, truth, outs))
    return runs, time.perf_counter() - start


@pytest.fixture(scope="session")
def desk_matrix():
    report = run_matrix(BENCH, timeout=10.0, nodes=20_000)
    for r in report.records:
        if r.verdict == SAT:
            SAT_OUTCOMES.append((r.benchmark, _desk(r.benchmark + ".fpv"), parse_witness(r.witness)))
    return report


# -- criteria ----------------------------------------------------------------

def test_criterion_01_cardinality():
    t = time.perf_counter()
    c = card(FpInterval(1.0, 2.0))
    c_big = card(FpInterval(1e5, BINARY32.round(1e5 + 1)))
    card_time = time.perf_counter() - t
    t = time.perf_counter()
    n, v = 1, 1.0
    while v < 2.0:
        v = next_up(v)
        n += 1
    oracle_time = time.perf_counter() - t
    ok = c == 8_388_609 == n and c_big in (128, 129) and card_time < 5.0
    record(1, ok, f"card([1,2])={c} enumeration={n} card([1e5,1e5+1])={c_big} "
                  f"card time={card_time:.4f}s (oracle loop {oracle_time:.1f}s)")


def test_criterion_02_density_share():
    t = time.perf_counter()
    share = card(FpInterval(-1.0, 1.0)) / card(FpInterval.full())
    elapsed = time.perf_counter() - t
    record(2, 0.47 <= share <= 0.53 and elapsed < 1.0, f"share={share:.4f} time={elapsed:.4f}s")


def test_criterion_03_occurrence_tables():
    ok = True
    details = []
    for label, m in (("hand-built", occurrence_system()), ("derived", _desk("occ_sat.fpv").models[0])):
        names = ("x", "y", "z", "w")
        occ_l = {x: local_occ(x, m) for x in names}
        occ_g = {x: global_occ(x, m) for x in names}
        picks = {}
        for kind in (PropertyKind.LOCAL_OCC, PropertyKind.GLOBAL_OCC):
            sel = Selector(m, kind)
            picks[kind.value] = m.variables[sel.select(DomainStore.for_model(m), 0)]
        ok &= occ_l == {"x": 2, "y": 1, "z": 1, "w": 1}
        ok &= occ_g == {"x": 2, "y": 3, "z": 2, "w": 1}
        ok &= picks == {"localocc": "x", "globalocc": "y"}
        details.append(f"{label}: occ_l={list(occ_l.values())} occ_g={list(occ_g.values())} picks={picks}")
    record(3, ok, "; ".join(details))


def test_criterion_04_oracle_equivalence(tiny_runs):
    runs, elapsed = tiny_runs
    disagreements = 0
    sat_models = 0
    for src, ds, truth, outs in runs:
        sat_models += bool(truth)
        for out in outs.values():
            if out.verdict == TIMEOUT or (out.verdict == SAT) != bool(truth):
                disagreements += 1
    ok = len(runs) >= 200 and disagreements == 0 and elapsed < 600
    record(4, ok, f"{len(runs)} models ({sat_models} SAT) x {len(CONFIGS)} configs, "
                  f"disagreements={disagreements}, time={elapsed:.0f}s")


def test_criterion_06_zero_horizon_is_baseline():
    class PlainSelector(Selector):
        """Argmax over free candidates with no prohibition bookkeeping."""

        def select(self, store, depth):
            lb, ub = store.lb, store.ub
            cands = [i for i in self.universe if lb[i] != ub[i]]
            if not cands:
                return None
            best = max(cands, key=lambda i: (self.weight(i, store), -i))
            if self.trace is not None:
                self.trace.append((depth, best))
            return best

    mismatches, runs = 0, 0
    for path in DESK:
        ds = derive(parse_file(path))
        for kind in STRATEGIES:
            for restrict in (False, True):
                cfg = SearchConfig(kind, restrict, 0, timeout=600.0, node_budget=5_000, record_trace=True)
                for m in ds:
                    ref = Search(m, cfg)
                    ref.selector = PlainSelector(m, kind, restrict, 0)
                    ref.selector.trace = []
                    a, b = Search(m, cfg).run(), ref.run()
                    runs += 1
                    same = (a.verdict, a.stats.nodes, a.stats.fails, a.trace, a.witness) == \
                           (b.verdict, b.stats.nodes, b.stats.fails, b.trace, b.witness)
                    mismatches += not same
                    if a.verdict == SAT:
                        SAT_OUTCOMES.append((path.name, ds, a.witness))
    record(6, mismatches == 0, f"{runs} runs on {len(DESK)} desk benchmarks, trace/node mismatches={mismatches}")


def test_criterion_07_f23_case_study():
    ds = _desk("f23.fpv")
    both = solve_disjuncts(ds, SearchConfig("density", True, 2, timeout=60.0))
    div = solve_disjuncts(ds, SearchConfig("density", False, 2, timeout=60.0))
    base = solve_disjuncts(ds, SearchConfig("density", False, 0, timeout=7200.0, node_budget=2_000_000))
    for out in (both, div, base):
        if out.verdict == SAT:
            SAT_OUTCOMES.append(("f23", ds, out.witness))
    ok = (both.verdict == SAT and both.stats.elapsed < 60.0
          and base.verdict == TIMEOUT and base.stats.nodes >= 2_000_000
          and div.verdict == SAT and both.stats.nodes <= div.stats.nodes / 2)
    record(7, ok, f"restrict+diversify {both.verdict} nodes={both.stats.nodes} t={both.stats.elapsed:.2f}s; "
                  f"diversify {div.verdict} nodes={div.stats.nodes}; "
                  f"baseline {base.verdict} after {base.stats.nodes} nodes ({base.stats.elapsed:.0f}s)")


def test_criterion_08_spread_collapse(desk_matrix):
    base_sigma, base_mu = desk_matrix.spread("baseline")
    both_sigma, both_mu = desk_matrix.spread("restrict+diversify")
    ok = both_sigma < base_sigma and not desk_matrix.errors()
    record(8, ok, f"sigma(t_s) baseline={base_sigma:.3f}s (mu {base_mu:.3f}) -> "
                  f"restrict+diversify={both_sigma:.3f}s (mu {both_mu:.3f}); "
                  f"errors={len(desk_matrix.errors())}")


def test_criterion_09_singleton_exactness():
    rng = np.random.default_rng(9)
    n = 1_000_000
    checked, mismatches, overflow = 0, 0, 0
    for op in "+-*/":
        # three quarters random bit patterns, one quarter near-absorption pairs
        bits = rng.integers(0, 0xFF800000, size=(n, 2), dtype=np.uint64).astype(np.uint32)
        a = bits[:, 0].view(np.float32)
        b = bits[:, 1].view(np.float32)
        a = np.where(np.isfinite(a), a, np.float32(1.0))
        b = np.where(np.isfinite(b), b, np.float32(1.0))
        k = n // 4
        scale = np.exp2(-rng.integers(20, 30, size=k)).astype(np.float32)
        b[:k] = (a[:k] * scale).astype(np.float32)
        with np.errstate(all="ignore"):
            ref = {"+": a + b, "-": a - b, "*": a * b, "/": a / b}[op]
        for x, y, r in zip(a.tolist(), b.tolist(), ref.tolist()):
            got = forward_project(op, FpInterval(x, x), FpInterval(y, y))
            if not np.isfinite(r):
                overflow += 1
                mismatches += got is not None
                continue
            checked += 1
            if got is None or got.lb != got.ub or got.lb != r:
                mismatches += 1
    absorbed = forward_project("+", FpInterval.point(1.0), FpInterval.point(2.0 ** -24))
    ok = mismatches == 0 and absorbed == FpInterval.point(1.0)
    record(9, ok, f"{4 * n} pairs: {checked} finite bit-exact checks, {overflow} non-finite "
                  f"(projection empty), mismatches={mismatches}; 1+2^-24 -> {absorbed}")


def test_criterion_10_split_partition():
    t = time.perf_counter()
    values = list(enumerate_floats(MOCK))
    bad, intervals = 0, 0
    for i, lo in enumerate(values):
        for hi in values[i:]:
            iv = FpInterval(lo, hi, MOCK)
            kids = split5(iv)
            members = [v for kid in kids for v in kid]
            intervals += 1
            if (sorted(members) != list(iv) or len(set(members)) != len(members)
                    or sum(card(kid) for kid in kids) != card(iv)):
                bad += 1
    elapsed = time.perf_counter() - t
    record(10, bad == 0 and elapsed < 60, f"{intervals} mock intervals, violations={bad}, time={elapsed:.1f}s")


def test_criterion_11_restrict_invariance(tiny_runs, desk_matrix):
    runs, _ = tiny_runs
    differing, compared = 0, 0
    for src, ds, truth, outs in runs:
        for k in STRATEGIES:
            for u in (0, 2):
                a, b = outs[(k, False, u)].verdict, outs[(k, True, u)].verdict
                compared += 1
                differing += a != b
    desk_diff, desk_cmp, skipped = 0, 0, 0
    by_key = {(r.benchmark, r.strategy, r.features): r.verdict for r in desk_matrix.records}
    for (bench, strat, feat), v in by_key.items():
        if feat not in ("baseline", "diversify"):
            continue
        w = by_key[(bench, strat, "restrict" if feat == "baseline" else "restrict+diversify")]
        if TIMEOUT in (v, w):
            skipped += 1
            continue
        desk_cmp += 1
        desk_diff += v != w
    per_bench = {}
    for (bench, _, _), v in by_key.items():
        if v != TIMEOUT:
            per_bench.setdefault(bench, set()).add(v)
    inconsistent = [b for b, vs in per_bench.items() if len(vs) > 1]
    ok = differing == 0 and desk_diff == 0 and not inconsistent and len(per_bench) == len(DESK)
    record(11, ok, f"tiny corpus: {compared} classic/restrict pairs, differing={differing}; "
                   f"desk: {desk_cmp} pairs compared ({skipped} with a timeout skipped), differing={desk_diff}, "
                   f"benchmarks with mixed verdicts={len(inconsistent)}")


def test_criterion_05_witness_soundness(tiny_runs, desk_matrix):
    # runs last in this module: every SAT produced above is re-executed
    truth = {src: t for src, _, t, _ in tiny_runs[0]}
    uncertified = 0
    for label, ds, witness in SAT_OUTCOMES:
        certified = witness is not None and any(concrete_eval(m, witness) for m in ds)
        if label in truth:
            m0 = ds.models[0]
            certified &= tuple(witness[x] for x in m0.inputs) in truth[label]
        uncertified += not certified
    record(5, bool(SAT_OUTCOMES) and uncertified == 0,
           f"{len(SAT_OUTCOMES)} SAT outcomes re-executed, uncertified={uncertified}")

