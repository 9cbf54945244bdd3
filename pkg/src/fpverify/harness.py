"""Strategy x feature benchmark matrix with timeout/runtime aggregation."""
from __future__ import annotations

import csv
import re
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .metrics import STRATEGIES, PropertyKind
from .model import derive
from .parser import parse
from .search import TIMEOUT, SearchConfig, solve_disjuncts

FEATURES = ("baseline", "restrict", "diversify", "restrict+diversify")
CLASSES = ("SAT", "UNSAT", "ALL")
CSV_COLUMNS = ("benchmark", "strategy", "features", "verdict", "t_s", "nodes", "fails", "max_depth", "witness")

_EXPECT = re.compile(r"#\s*expect:\s*(SAT|UNSAT|UNKNOWN)", re.IGNORECASE)


@dataclass
class RunRecord:
    benchmark: str
    strategy: str
    features: str
    verdict: str
    t_s: float
    nodes: int
    fails: int
    max_depth: int
    witness: str = ""

    def row(self) -> dict:
        d = asdict(self)
        d["t_s"] = f"{self.t_s:.6f}"
        return d


def feature_config(kind: PropertyKind, features: str, timeout: float, nodes: int | None = None,
                   u: int = 2) -> SearchConfig:
    restrict = "restrict" in features
    horizon = u if "diversify" in features else 0
    return SearchConfig(kind, restrict, horizon, timeout, nodes)


def format_witness(witness: dict[str, float] | None) -> str:
    if not witness:
        return ""
    return ";".join(f"{k}={float.hex(v)}" for k, v in witness.items())


def parse_witness(text: str) -> dict[str, float]:
    out = {}
    for part in filter(None, text.split(";")):
        k, v = part.split("=", 1)
        out[k] = float.fromhex(v)
    return out


def run_one(name: str, source: str, kind: PropertyKind, features: str, timeout: float,
            nodes: int | None = None, u: int = 2) -> RunRecord:
    ds = derive(parse(source))
    cfg = feature_config(kind, features, timeout, nodes, u)
    out = solve_disjuncts(ds, cfg)
    t_s = out.stats.elapsed
    if out.verdict == TIMEOUT:
        # a run stopped by the node budget is charged the full timeout
        t_s = max(t_s, timeout)
    return RunRecord(name, kind.value, features, out.verdict, t_s, out.stats.nodes,
                     out.stats.fails, out.stats.max_depth, format_witness(out.witness))


def expected_class(source: str) -> str:
    for line in source.splitlines():
        line = line.strip()
        if not line:
            continue
        if not line.startswith("#"):
            break
        m = _EXPECT.search(line)
        if m:
            return m.group(1).upper()
    return "UNKNOWN"


@dataclass
class Cell:
    to: int = 0
    t_s: float = 0.0
    count: int = 0


@dataclass
class MatrixReport:
    records: list[RunRecord]
    expected: dict[str, str]
    timeout: float
    sizes: dict[str, tuple[int, int]] = field(default_factory=dict)
    strategies: tuple[str, ...] = tuple(k.value for k in STRATEGIES)
    features: tuple[str, ...] = FEATURES

    def benchmark_class(self, bench: str) -> str | None:
        exp = self.expected.get(bench, "UNKNOWN")
        if exp != "UNKNOWN":
            return exp
        seen = {r.verdict for r in self.records if r.benchmark == bench and r.verdict != TIMEOUT}
        return seen.pop() if len(seen) == 1 else None

    def cells(self) -> dict[tuple[str, str, str], Cell]:
        out = {(s, f, c): Cell() for s in self.strategies for f in self.features for c in CLASSES}
        for r in self.records:
            cls = self.benchmark_class(r.benchmark)
            if cls is None:
                continue
            for c in (cls, "ALL"):
                cell = out[(r.strategy, r.features, c)]
                cell.count += 1
                cell.t_s += r.t_s
                cell.to += r.verdict == TIMEOUT
        return out

    def spread(self, features: str, cls: str = "ALL") -> tuple[float, float]:
        """Population standard deviation and mean of t_s across strategies."""
        cells = self.cells()
        times = [cells[(s, features, cls)].t_s for s in self.strategies]
        return statistics.pstdev(times), statistics.mean(times)

    def errors(self) -> list[str]:
        errs = []
        by_bench: dict[str, set[str]] = {}
        for r in self.records:
            if r.verdict == TIMEOUT:
                continue
            by_bench.setdefault(r.benchmark, set()).add(r.verdict)
            exp = self.expected.get(r.benchmark, "UNKNOWN")
            if exp != "UNKNOWN" and r.verdict != exp:
                errs.append(f"{r.benchmark}: {r.strategy}/{r.features} returned {r.verdict}, expected {exp}")
        for bench, verdicts in sorted(by_bench.items()):
            if len(verdicts) > 1:
                errs.append(f"{bench}: inconsistent verdicts {sorted(verdicts)}")
        return errs

    def table_rows(self) -> list[dict]:
        cells = self.cells()
        rows = []
        for f in self.features:
            for c in CLASSES:
                sigma, mu = self.spread(f, c)
                row = {"features": f, "class": c}
                for s in self.strategies:
                    row[f"{s}_To"] = cells[(s, f, c)].to
                    row[f"{s}_t_s"] = round(cells[(s, f, c)].t_s, 3)
                row["sigma_t_s"] = round(sigma, 3)
                row["mu_t_s"] = round(mu, 3)
                rows.append(row)
        return rows

    def render(self) -> str:
        cells = self.cells()
        head = ["features", "class", "kind"] + list(self.strategies) + ["sigma/mu"]
        lines = []
        for f in self.features:
            for c in CLASSES:
                sigma, mu = self.spread(f, c)
                lines.append([f, c, "To"] + [str(cells[(s, f, c)].to) for s in self.strategies] + [f"{sigma:.2f}"])
                lines.append(["", "", "t_s"] + [f"{cells[(s, f, c)].t_s:.2f}" for s in self.strategies] + [f"{mu:.2f}"])
        widths = [max(len(r[i]) for r in [head] + lines) for i in range(len(head))]
        fmt = lambda r: "  ".join(v.rjust(w) for v, w in zip(r, widths))  # noqa: E731
        out = [fmt(head)] + [fmt(r) for r in lines]
        if self.sizes:
            out.append("")
            out.append("restricted variables per benchmark:")
            for b, (ni, nx) in sorted(self.sizes.items()):
                out.append(f"  {b}: |I|={ni} |X|={nx} reduction={100 * (1 - ni / nx):.1f}%")
        errs = self.errors()
        if errs:
            out.append("")
            out.append("ERRORS:")
            out.extend(f"  {e}" for e in errs)
        return "\n".join(out)


def compare_rows(report: MatrixReport, cls: str = "ALL") -> list[dict]:
    """Per feature row: runtime range, spread, and spread relative to baseline."""
    cells = report.cells()
    base_sigma, _ = report.spread("baseline", cls) if "baseline" in report.features else (None, None)
    out = []
    for f in report.features:
        times = [cells[(s, f, cls)].t_s for s in report.strategies]
        sigma, mu = report.spread(f, cls)
        ratio = None
        if base_sigma:
            ratio = sigma / base_sigma
        out.append({"features": f, "min_t_s": min(times), "max_t_s": max(times),
                    "sigma_t_s": sigma, "mu_t_s": mu, "sigma_ratio": ratio})
    return out


def _task(args):
    return run_one(*args)


def run_matrix(directory, timeout: float = 60.0, jobs: int = 1, nodes: int | None = None,
               strategies=STRATEGIES, features=FEATURES, u: int = 2) -> MatrixReport:
    paths = sorted(Path(directory).glob("*.fpv"))
    if not paths:
        raise ValueError(f"no .fpv benchmarks in {directory}")
    sources = {p.stem: p.read_text(encoding="utf-8") for p in paths}
    expected = {name: expected_class(src) for name, src in sources.items()}
    sizes = {}
    for name, src in sources.items():
        m = derive(parse(src)).models[0]
        sizes[name] = (len(m.inputs), len(m.variables))
    kinds = [PropertyKind.parse(s) if isinstance(s, str) else s for s in strategies]
    tasks = [(name, src, k, f, timeout, nodes, u)
             for name, src in sources.items() for k in kinds for f in features]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_task, tasks))
    else:
        records = [_task(t) for t in tasks]
    records.sort(key=lambda r: (r.benchmark, r.strategy, FEATURES.index(r.features)))
    return MatrixReport(records, expected, timeout, sizes, tuple(k.value for k in kinds), tuple(features))


def write_records(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for r in records:
            w.writerow(r.row())


def write_table(report: MatrixReport, path) -> None:
    rows = report.table_rows()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)

