"""Command-line entry points: solve or inspect one ``.fpv`` file, or run a benchmark matrix."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import RunRecord, compare_rows, format_witness, run_matrix, write_records, write_table
from .metrics import PropertyKind, StaticWeights
from .model import DerivationError, derive
from .parser import ParseError, parse
from .search import SAT, TIMEOUT, UNSAT, SearchConfig, solve_disjuncts

EXIT_CODES = {SAT: 10, UNSAT: 20, TIMEOUT: 30}
STRATEGY_NAMES = [k.value for k in PropertyKind]


def _strategy(name: str) -> PropertyKind:
    try:
        return PropertyKind.parse(name)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGY_NAMES)}")


def _solve_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpverify", description="Search for floating-point counter-examples.",
                                epilog="Use 'fpverify bench --help' for the benchmark matrix.")
    p.add_argument("file", help="program in the .fpv language")
    p.add_argument("--strategy", type=_strategy, default=PropertyKind.GLOBAL_OCC,
                   help=f"variable property to maximize ({', '.join(STRATEGY_NAMES)})")
    p.add_argument("--restrict", action="store_true", help="branch on input variables only")
    p.add_argument("--diversify", type=int, default=0, metavar="U", help="prohibition horizon (0 = off)")
    p.add_argument("--timeout", type=float, default=60.0, metavar="SECONDS")
    p.add_argument("--nodes", type=int, default=None, metavar="N", help="node budget")
    p.add_argument("--csv", metavar="PATH", help="write a one-row CSV report")
    p.add_argument("--inspect", action="store_true", help="print the derived model instead of solving")
    return p


def _bench_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpverify bench", description="Run every strategy and feature set over a directory.")
    p.add_argument("--dir", required=True, help="directory of .fpv benchmarks")
    p.add_argument("--timeout", type=float, default=60.0, metavar="SECONDS")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.add_argument("--nodes", type=int, default=None, metavar="N")
    p.add_argument("--diversify", type=int, default=2, metavar="U", help="horizon used by the diversify rows")
    p.add_argument("--out", default="report.csv", metavar="PATH")
    return p


def inspect_report(ds, out=None) -> None:
    out = out or sys.stdout
    m = ds.models[0]
    print(f"format: {m.fmt.name}", file=out)
    print("variables:", file=out)
    for i, x in enumerate(m.variables):
        tag = " (input)" if x in m.inputs else ""
        print(f"  {i + 1:>3} {x} in {m.domains[i]}{tag}", file=out)
    print(f"inputs: I = {{{', '.join(m.inputs)}}}  |I| = {len(m.inputs)}  |X| = {len(m.variables)}", file=out)
    if len(m.inputs) == 1:
        print("  note: a single input leaves restricted search no variable choice", file=out)
    print(f"output: {m.output}", file=out)
    print(f"disjuncts: {len(ds.models)}", file=out)
    for k, dm in enumerate(ds.models):
        print(f"constraints (disjunct {k + 1}):", file=out)
        for c in dm.constraints:
            print(f"  [{c.source}] {c}", file=out)
    print("static weights:", file=out)
    print(f"  {'var':<12} {'lex':>4} {'degree':>6} {'occ_l':>5} {'occ_g':>5}", file=out)
    # pre/post constraints differ per disjunct; weights are shown for the first
    for row in StaticWeights.of(m).table(m):
        print(f"  {row['var']:<12} {row['lex']:>4} {row['degree']:>6} {row['occ_l']:>5} {row['occ_g']:>5}", file=out)


def run_solve(argv) -> int:
    parser = _solve_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    if args.diversify < 0 or args.timeout <= 0:
        print("fpverify: --diversify must be >= 0 and --timeout > 0", file=sys.stderr)
        return 1
    path = Path(args.file)
    try:
        source = path.read_text(encoding="utf-8")
        ds = derive(parse(source))
    except OSError as e:
        print(f"fpverify: cannot read {path}: {e.strerror}", file=sys.stderr)
        return 1
    except (ParseError, DerivationError) as e:
        print(f"{path}:{e}", file=sys.stderr)
        return 1
    if args.inspect:
        inspect_report(ds)
        return 0
    cfg = SearchConfig(args.strategy, args.restrict, args.diversify, args.timeout, args.nodes)
    out = solve_disjuncts(ds, cfg)
    t_s = out.stats.elapsed
    if out.verdict == TIMEOUT:
        t_s = max(t_s, args.timeout)
    rec = RunRecord(path.stem, cfg.kind.value, cfg.features, out.verdict, t_s, out.stats.nodes,
                    out.stats.fails, out.stats.max_depth, format_witness(out.witness))
    line = (f"{rec.verdict} {rec.benchmark} strategy={rec.strategy} features={rec.features} "
            f"t_s={rec.t_s:.3f} nodes={rec.nodes} fails={rec.fails} max_depth={rec.max_depth}")
    if out.stats.fallbacks:
        line += f" fallbacks={out.stats.fallbacks}"
    if rec.witness:
        line += f" witness={rec.witness}"
    print(line)
    if args.csv:
        write_records([rec], args.csv)
    return EXIT_CODES[out.verdict]


def run_bench(argv) -> int:
    parser = _bench_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    try:
        report = run_matrix(args.dir, args.timeout, args.jobs, args.nodes, u=args.diversify)
    except ValueError as e:
        print(f"fpverify bench: {e}", file=sys.stderr)
        return 1
    write_records(report.records, args.out)
    out = Path(args.out)
    write_table(report, out.with_name(out.stem + "_table.csv"))
    print(report.render())
    print()
    for row in compare_rows(report):
        ratio = "-" if row["sigma_ratio"] is None else f"{row['sigma_ratio']:.3f}"
        print(f"{row['features']:<20} min={row['min_t_s']:.2f} max={row['max_t_s']:.2f} "
              f"sigma={row['sigma_t_s']:.2f} mu={row['mu_t_s']:.2f} sigma/baseline={ratio}")
    return 2 if report.errors() else 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "bench":
        return run_bench(argv[1:])
    return run_solve(argv)


if __name__ == "__main__":
    sys.exit(main())
