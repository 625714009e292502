"""Subcommand front end wiring the library together for batch use.

Every subcommand is a thin adapter: inputs are parsed, library calls are
made, outputs are written. No statistic is computed here. Exit codes:
0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import plots
from .anneal import SOLVER_SQA
from .diversity import (
    PERCENTILE_GRID,
    CensusRecord,
    SolutionCensus,
    cross_solver_hamming_table,
    distinct_solutions_curve,
    efficiency_vs_s_curve,
    fpr_vs_s_curve,
    greedy_max_hamming_subset,
    mixed_fpr_curve,
    pairwise_hamming_stats,
    probability_to_find_distribution,
    read_census,
    record_line,
    sqa_hardness_percentiles,
    write_cross_table_csv,
    write_curves_csv,
    DiversityCurve,
)
from .errors import DomainError, SatFilterError
from .filters import (
    HashFamily,
    build_filter,
    efficiency_from_alpha,
    filter_metrics,
    fpr_independent,
    load_filter,
    save_filter,
)
from .harness import (
    ExperimentSpec,
    generate_batch,
    run_experiment,
    scaling_study,
    write_manifest,
)
from .instance import (
    Assignment,
    enumerate_solutions,
    read_dimacs,
    write_dimacs,
    write_sidecar,
)
from .seeds import derive_seed
from .solvers import SOLVER_TAGS, ensure_solver_tag, load_schedule, run_solver, schedule_to_json


# ------------------------------------------------------------- subcommands

def _cmd_gen(args) -> int:
    if args.k > args.n:
        args.parser.error(f"clause width k={args.k} exceeds n={args.n}")
    if args.count < 1:
        args.parser.error("--count must be at least 1")
    spec = ExperimentSpec(
        k=args.k, n=args.n, m=args.m, alpha=args.alpha,
        target_efficiency=args.efficiency, instance_count=args.count,
        master_seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    batch = generate_batch(spec, args.n, purpose="gen")
    for iid, inst in batch:
        if args.dedupe:
            inst = inst.deduplicated()
        write_dimacs(inst, out / f"{iid}.cnf")
        write_sidecar(inst, out / f"{iid}.json")
    write_manifest(out, args.seed)
    print(f"wrote {len(batch)} instances (n={args.n}, k={args.k}, "
          f"m={spec.m_for(args.n)}) to {out}")
    return 0


def _cmd_solve(args) -> int:
    if args.runs < 0:
        args.parser.error("--runs must be non-negative")
    inst = read_dimacs(args.infile)
    schedule = load_schedule(args.schedule)
    ensure_solver_tag(schedule, args.solver)
    solver_id = SOLVER_TAGS[args.solver]
    iid = args.instance_id or Path(args.infile).stem
    out = Path(args.out)
    offset = 0
    if out.exists():
        prior = [
            rec.run for rec in read_census(out)
            if rec.instance == iid and rec.solver == solver_id
        ]
        if prior:
            offset = max(prior) + 1
    schedule_json = schedule_to_json(schedule)
    satisfied = 0
    with open(out, "a", encoding="utf-8") as fh:
        for i in range(args.runs):
            run = offset + i
            seed = derive_seed(args.seed, "run", iid, solver_id, run)
            result = run_solver(inst, schedule, seed)
            satisfied += result.satisfied
            rec = CensusRecord.from_json(result.to_record(iid, run, schedule_json))
            fh.write(record_line(rec))
            fh.write("\n")
    print(f"{solver_id} on {iid}: {satisfied}/{args.runs} runs satisfied "
          f"(appended to {out})")
    return 0


def _distinct_pool(records, iid: str, solver: str | None, n: int) -> list[Assignment]:
    picked = [
        rec for rec in sorted(records, key=lambda r: (r.solver, r.run))
        if rec.instance == iid
        and rec.satisfied
        and (solver is None or rec.solver == solver)
    ]
    for rec in picked:
        if rec.n != n:
            raise DomainError(f"census record n={rec.n} does not match instance n={n}")
    return list(dict.fromkeys(rec.assignment for rec in picked))


def _cmd_filter_build(args) -> int:
    inst = read_dimacs(args.infile)
    iid = args.instance_id or Path(args.infile).stem
    if args.census:
        pool = _distinct_pool(read_census(args.census), iid, args.solver, inst.n)
    else:
        lines = Path(args.solutions).read_text(encoding="utf-8").split()
        pool = list(dict.fromkeys(Assignment.from_hex(line, inst.n) for line in lines))
    if args.s > len(pool):
        raise DomainError(f"asked for s={args.s} but only {len(pool)} distinct "
                          "solutions are available")
    if args.selection == "first":
        chosen = pool[: args.s]
    elif args.selection == "random":
        rng = np.random.default_rng(args.seed)
        chosen = [pool[i] for i in rng.choice(len(pool), args.s, replace=False)]
    else:
        chosen = greedy_max_hamming_subset(pool, args.s, args.seed)
    family = HashFamily(
        k=inst.k, n=inst.n, master_seed=args.master_seed,
        family_index=args.family_index,
    )
    flt = build_filter(inst, family, chosen)
    save_filter(flt, args.out)
    if args.metrics:
        metrics = filter_metrics(flt)
        Path(str(args.out) + ".metrics.json").write_text(
            json.dumps(metrics.to_json(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    print(f"filter with s={flt.s}, n={flt.n}, k={flt.k} written to {args.out}")
    return 0


def _cmd_filter_query(args) -> int:
    flt = load_filter(args.filter)
    elements = list(args.element)
    if args.elements_file:
        text = Path(args.elements_file).read_text(encoding="utf-8")
        elements.extend(line for line in text.splitlines() if line)
    if not elements:
        args.parser.error("no elements given (use --element or --elements-file)")
    for element in elements:
        print(f"{element}\t{flt.query(element).value}")
    return 0


def _load_instance_dir(path: str | Path) -> dict:
    mapping = {}
    for cnf in sorted(Path(path).glob("*.cnf")):
        mapping[cnf.stem] = read_dimacs(cnf)
    if not mapping:
        raise DomainError(f"no .cnf files under {path}")
    return mapping


def _parse_percentiles(text: str | None):
    if text is None:
        return PERCENTILE_GRID
    return tuple(float(part) for part in text.split(",") if part)


def _cmd_analyze(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    census = SolutionCensus(read_census(args.census), _load_instance_dir(args.instances))
    solvers = args.solvers.split(",") if args.solvers else census.solvers
    first = census.instance(census.instance_ids[0])
    percentiles = _parse_percentiles(args.percentiles)
    plot = not args.no_plots

    if args.kind == "distinct-curve":
        curves = [
            distinct_solutions_curve(census, solver, args.normalizer)
            for solver in solvers
        ]
        write_curves_csv(out / "distinct_curves.csv", curves)
        if plot:
            ylabel = ("distinct solutions / SA total"
                      if args.normalizer == "by_sa_total" else "distinct solutions")
            plots.plot_curves(curves, out / "distinct_curves.png", "runs", ylabel)
    elif args.kind in ("fpr-curve", "efficiency-curve"):
        fn = fpr_vs_s_curve if args.kind == "fpr-curve" else efficiency_vs_s_curve
        curves = [
            fn(census, solver, args.selection, args.s_max, args.resamples,
               args.seed, args.cap)
            for solver in solvers
        ]
        name = "fpr_curves" if args.kind == "fpr-curve" else "efficiency_curves"
        write_curves_csv(out / f"{name}.csv", curves)
        if plot:
            xs = np.arange(1, args.s_max + 1)
            if args.kind == "fpr-curve":
                ref = (xs, np.array([fpr_independent(first.k, s) for s in xs]),
                       "independent")
                plots.plot_curves(curves, out / f"{name}.png", "stored solutions s",
                                  "false positive rate", reference=ref, logy=True)
            else:
                level = efficiency_from_alpha(first.k, first.alpha)
                ref = (xs, np.full(xs.size, level), "independent")
                plots.plot_curves(curves, out / f"{name}.png", "stored solutions s",
                                  "filter efficiency", reference=ref)
    elif args.kind == "hamming":
        import csv as _csv

        rows = []
        for solver in solvers:
            for iid in census.instance_ids:
                pool = census.distinct(iid, solver, args.first_runs)
                if len(pool) < 2:
                    continue
                stats = pairwise_hamming_stats(pool)
                rows.append((iid, solver, len(pool), stats["mean"], stats["max"]))
        with open(out / "hamming.csv", "w", encoding="utf-8", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["instance", "solver", "distinct", "mean", "max"])
            for row in rows:
                writer.writerow([row[0], row[1], row[2], repr(row[3]), repr(row[4])])
        if plot:
            curves = []
            for solver in solvers:
                means = np.array([r[3] for r in rows if r[1] == solver])
                if means.size == 0:
                    continue
                err = means.std(ddof=1) / np.sqrt(means.size) if means.size > 1 else 0.0
                curves.append(DiversityCurve(
                    x=np.array([0.0]), mean=np.array([means.mean()]),
                    stderr=np.array([err]), solver=solver, selection="pairwise",
                ))
            ref = (np.array([-0.5, 0.5]), np.full(2, first.n / 2), "independent (n/2)")
            plots.plot_curves(curves, out / "hamming.png", "",
                              "mean pairwise Hamming distance", reference=ref)
    elif args.kind == "hardness":
        if not args.solver:
            args.parser.error("--kind hardness needs --solver (the comparison solver)")
        easiest, hardest = sqa_hardness_percentiles(
            census, args.solver, percentiles, reference=args.reference
        )
        write_curves_csv(out / "hardness_curves.csv", [easiest, hardest])
        if plot:
            plots.plot_curves(
                [easiest, hardest], out / "hardness_curves.png",
                f"percentile of {args.reference}-found solutions",
                f"{args.solver} find probability per run",
            )
    elif args.kind == "mixing":
        mixed = mixed_fpr_curve(
            census, args.solver_a, args.solver_b, args.fraction_a,
            args.s_max, args.resamples, args.seed, args.cap,
        )
        pure = [
            fpr_vs_s_curve(census, solver, "random", args.s_max, args.resamples,
                           args.seed, args.cap)
            for solver in (args.solver_a, args.solver_b)
        ]
        curves = [mixed, *pure]
        write_curves_csv(out / "mixing_curves.csv", curves)
        if plot:
            xs = np.arange(1, args.s_max + 1)
            ref = (xs, np.array([fpr_independent(first.k, s) for s in xs]),
                   "independent")
            plots.plot_curves(curves, out / "mixing_curves.png",
                              "stored solutions s", "false positive rate",
                              reference=ref, logy=True)
    elif args.kind == "prob-to-find":
        if not args.solver:
            args.parser.error("--kind prob-to-find needs --solver")
        if args.oracle_solver:
            oracle = {
                iid: census.distinct(iid, args.oracle_solver)
                for iid in census.instance_ids
            }
        else:
            oracle = {
                iid: enumerate_solutions(census.instance(iid))
                for iid in census.instance_ids
            }
        curve = probability_to_find_distribution(census, args.solver, oracle,
                                                 percentiles)
        write_curves_csv(out / "prob_to_find.csv", [curve])
        if plot:
            plots.plot_curves([curve], out / "prob_to_find.png",
                              "percentile of existing solutions",
                              "rarest find probability per run")
    elif args.kind == "cross-table":
        table = cross_solver_hamming_table(
            census, solvers if args.solvers else None, args.first_runs
        )
        write_cross_table_csv(out / "cross_table.csv", table)
        if plot:
            plots.plot_cross_table(table, out / "cross_table.png",
                                   baseline=first.n / 2)
    else:
        args.parser.error(f"unknown analysis kind {args.kind!r}")
    write_manifest(out, args.seed)
    print(f"{args.kind} outputs written to {out}")
    return 0


def _cmd_sweep(args) -> int:
    spec = ExperimentSpec.from_file(args.config)
    census = run_experiment(spec, args.out, workers=args.workers)
    out = Path(args.out)
    if not args.no_plots:
        curves = [
            distinct_solutions_curve(census, solver)
            for solver in spec.solvers
            if any(census.runs(iid, solver) for iid in census.instance_ids)
        ]
        if curves:
            plots.plot_curves(curves, out / "distinct_curves.png", "runs",
                              "distinct solutions")
        write_manifest(out, spec.master_seed)
    total = len(census.records)
    print(f"census complete: {total} records in {out / 'census.jsonl'}")
    return 0


def _cmd_scaling(args) -> int:
    spec = ExperimentSpec.from_file(args.config)
    records = scaling_study(spec, args.out, workers=args.workers)
    out = Path(args.out)
    if not args.no_plots:
        plots.plot_effort(records, out / "effort.png")
        write_manifest(out, spec.master_seed)
    for rec in records:
        print(f"n={rec.n} {rec.solver}: p={rec.success_probability:.4f} "
              f"+/- {rec.stderr:.4f}, effort={rec.effort_99}")
    return 0


# ------------------------------------------------------------------ parser

def _add_common_analyze_flags(sub) -> None:
    sub.add_argument("--selection", choices=("random", "greedy_max_hamming"),
                     default="random")
    sub.add_argument("--s-max", type=int, default=20)
    sub.add_argument("--resamples", type=int, default=25)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--cap", type=int, default=10**8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satfilter",
        description="Satisfiability filters: instance generation, stochastic "
                    "solvers, filter construction, and diversity analysis.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate random k-SAT instances")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    sizing = gen.add_mutually_exclusive_group(required=True)
    sizing.add_argument("--alpha", type=float)
    sizing.add_argument("--m", type=int)
    sizing.add_argument("--efficiency", type=float)
    gen.add_argument("--count", type=int, default=20)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--dedupe", action="store_true",
                     help="drop repeated clauses before writing")
    gen.set_defaults(func=_cmd_gen, parser=gen)

    solve = subs.add_parser("solve", help="run a solver on one instance")
    solve.add_argument("--in", dest="infile", required=True)
    solve.add_argument("--solver", choices=sorted(SOLVER_TAGS), required=True)
    solve.add_argument("--schedule", required=True, help="schedule JSON file")
    solve.add_argument("--runs", type=int, default=1)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--instance-id", default=None)
    solve.add_argument("--out", required=True, help="census JSONL to append to")
    solve.set_defaults(func=_cmd_solve, parser=solve)

    fbuild = subs.add_parser("filter-build", help="build a filter from solutions")
    fbuild.add_argument("--in", dest="infile", required=True)
    source = fbuild.add_mutually_exclusive_group(required=True)
    source.add_argument("--census", help="census JSONL with solutions")
    source.add_argument("--solutions", help="file of hex assignments")
    fbuild.add_argument("--instance-id", default=None)
    fbuild.add_argument("--solver", default=None,
                        help="restrict census solutions to one solver")
    fbuild.add_argument("--s", type=int, required=True)
    fbuild.add_argument("--selection", choices=("first", "random", "greedy"),
                        default="first")
    fbuild.add_argument("--master-seed", type=int, default=0)
    fbuild.add_argument("--family-index", type=int, default=0)
    fbuild.add_argument("--seed", type=int, default=0)
    fbuild.add_argument("--metrics", action="store_true",
                        help="also write <out>.metrics.json")
    fbuild.add_argument("--out", required=True)
    fbuild.set_defaults(func=_cmd_filter_build, parser=fbuild)

    fquery = subs.add_parser("filter-query", help="query a stored filter")
    fquery.add_argument("--filter", required=True)
    fquery.add_argument("--element", action="append", default=[])
    fquery.add_argument("--elements-file", default=None)
    fquery.set_defaults(func=_cmd_filter_query, parser=fquery)

    analyze = subs.add_parser("analyze", help="census statistics and figures")
    analyze.add_argument(
        "--kind", required=True,
        choices=("distinct-curve", "fpr-curve", "efficiency-curve", "hamming",
                 "hardness", "mixing", "prob-to-find", "cross-table"),
    )
    analyze.add_argument("--census", required=True)
    analyze.add_argument("--instances", required=True,
                         help="directory of .cnf files named <instance-id>.cnf")
    analyze.add_argument("--out", required=True)
    analyze.add_argument("--solvers", default=None, help="comma-separated subset")
    analyze.add_argument("--solver", default=None,
                         help="comparison solver (hardness, prob-to-find)")
    analyze.add_argument("--reference", default=SOLVER_SQA,
                         help="ranking solver for hardness percentiles")
    analyze.add_argument("--normalizer", choices=("none", "by_sa_total"),
                         default="none")
    analyze.add_argument("--fraction-a", type=float, default=0.1)
    analyze.add_argument("--solver-a", default="SQA")
    analyze.add_argument("--solver-b", default="SA")
    analyze.add_argument("--percentiles", default=None,
                         help="comma-separated percentile grid")
    analyze.add_argument("--first-runs", type=int, default=None)
    analyze.add_argument("--oracle-solver", default=None,
                         help="use this solver's census as the oracle set "
                              "(default: exhaustive enumeration)")
    analyze.add_argument("--no-plots", action="store_true")
    _add_common_analyze_flags(analyze)
    analyze.set_defaults(func=_cmd_analyze, parser=analyze)

    sweep = subs.add_parser("sweep", help="full experiment from a config file")
    sweep.add_argument("--config", required=True, help="JSON or TOML spec")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=None)
    sweep.add_argument("--no-plots", action="store_true")
    sweep.set_defaults(func=_cmd_sweep, parser=sweep)

    scaling = subs.add_parser("scaling", help="effort-to-99%% scaling study")
    scaling.add_argument("--config", required=True, help="JSON or TOML spec")
    scaling.add_argument("--out", required=True)
    scaling.add_argument("--workers", type=int, default=None)
    scaling.add_argument("--no-plots", action="store_true")
    scaling.set_defaults(func=_cmd_scaling, parser=scaling)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except SatFilterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
