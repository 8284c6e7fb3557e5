"""Command-line entry points: generate, run, compare, toy, sample-similarity.

All randomness flows from --seed through the documented child-seed
derivation, so every command is deterministic given its full flag set.  Each
report is plain CSV; --plot additionally renders a PNG figure next to it.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .ea import EAConfig
from .families import FamilyId
from .generator import (
    ALL_FAMILIES,
    KnowledgeBase,
    TransferScenario,
    build_knowledge_base,
    generate_problem,
    load_kb,
    make_benchmark,
    save_kb,
)
from .seeds import derive_seed
from .similarity import (
    SimilaritySpec,
    analytic_bin_masses,
    estimate_density,
    parse_kind,
    SimilarityKind,
    sample_similarities,
)
from .stats import ranking_groups
from .toy import (
    DecisionSpace,
    FeatureDistribution,
    IntervalTask,
    optimum_coverage,
    solve,
    toy_similarities,
)
from .transfer import AlgorithmId, parse_algorithms, run_sto

CSV_SCHEMAS = """\
CSV schemas (column order is fixed):
  results:    problem,algorithm,seed,chosen_source,extra_evals,final_best,final_best_noise_free
  history:    algorithm,seed,generation,evals_used,best_so_far,best_so_far_noise_free
  histogram:  bin_low,bin_high,mass,density[,analytic_density]
  ranking:    rank,algorithm,median,group_id
  toy map:    l1,l2,x1,x2
  coverage:   space,u1,u2,grid,samples,occupied,total_cells,outside,gamma
Environment: STOPGEN_THREADS caps the number of concurrent runs of `run`.
"""


def _fmt(value: float) -> str:
    return repr(float(value))


def _read_knots(path: str) -> list[tuple[float, float]]:
    knots = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if parts[0].lower() in ("s", "x"):  # header row
                continue
            if len(parts) != 2:
                raise ValueError(f"bad knot line {line!r}, expected 's,density'")
            knots.append((float(parts[0]), float(parts[1])))
    return knots


def _spec_from_args(args) -> SimilaritySpec:
    kind = parse_kind(args.dist)
    if kind is SimilarityKind.CUSTOM:
        if not args.knots:
            raise ValueError("--dist custom requires --knots FILE")
        return SimilaritySpec.custom(_read_knots(args.knots))
    return SimilaritySpec(kind)


def cmd_generate(args) -> int:
    if args.stop is not None:
        problem = make_benchmark(args.stop, args.k, args.seed, strict=args.strict)
    else:
        if not args.family or not args.scenario or not args.dist:
            raise ValueError("either --stop or all of --family/--scenario/--dist are required")
        if args.dim is None:
            raise ValueError("--dim is required with an explicit problem spec")
        family = FamilyId.from_label(args.family)
        scenario = TransferScenario.parse(args.scenario)
        spec = _spec_from_args(args)
        problem = generate_problem(
            ALL_FAMILIES,
            ALL_FAMILIES.index(family),
            scenario,
            spec,
            args.dim,
            args.k,
            args.seed,
            strict=args.strict,
        )
    config = EAConfig(pop_size=args.pop_size, budget=args.source_budget)
    kb = build_knowledge_base(
        problem,
        seed=derive_seed(args.seed, "knowledge-base"),
        config=config,
        source_budget=args.source_budget,
        thin=args.thin,
    )
    out = Path(args.out) if args.out else Path(f"{problem.name}.json")
    save_kb(kb, out)
    realized = problem.realized_similarities()
    print(f"{problem.name} -> {out}")
    print(
        "realized similarity: "
        f"mean={np.mean(realized):.6f} min={np.min(realized):.6f} max={np.max(realized):.6f}"
    )
    if args.plot:
        from . import plots

        estimate = estimate_density(realized, args.bins)
        analytic = analytic_bin_masses(problem.similarity_spec, args.bins) * args.bins
        png = out.with_name(out.stem + "_similarity.png")
        plots.save_similarity_histogram(estimate, png, analytic, title=problem.name)
        print(f"figure -> {png}")
    return 0


def _run_cells(kb: KnowledgeBase, algos, config: EAConfig, runs: int, master_seed: int):
    cells = [(ai, run) for ai in range(len(algos)) for run in range(runs)]

    def work(cell):
        ai, run = cell
        algo = algos[ai]
        seed = derive_seed(master_seed, algo.value, run)
        result, outcome = run_sto(algo, kb.problem.target, kb.records, config, seed)
        return cell, (algo, seed, result, outcome)

    threads = max(1, int(os.environ.get("STOPGEN_THREADS", "1")))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = dict(pool.map(work, cells))
    else:
        done = dict(map(work, cells))
    return [done[cell] for cell in cells]  # deterministic order: algorithms, then runs


def cmd_run(args) -> int:
    if args.runs < 1:
        raise ValueError(f"--runs must be at least 1, got {args.runs}")
    kb = load_kb(args.kb)
    algos = parse_algorithms(args.algos)
    config = EAConfig(pop_size=args.pop_size, budget=args.budget)
    rows = _run_cells(kb, algos, config, args.runs, args.seed)

    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "problem",
                "algorithm",
                "seed",
                "chosen_source",
                "extra_evals",
                "final_best",
                "final_best_noise_free",
            ]
        )
        for algo, seed, result, outcome in rows:
            writer.writerow(
                [
                    kb.problem.name,
                    algo.value,
                    seed,
                    "" if outcome.chosen_source is None else outcome.chosen_source,
                    outcome.extra_evals,
                    _fmt(result.final_best_value),
                    _fmt(result.final_best_noise_free),
                ]
            )
    history_path = Path(args.history) if args.history else out.with_name(out.stem + "_history.csv")
    with open(history_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["algorithm", "seed", "generation", "evals_used", "best_so_far", "best_so_far_noise_free"]
        )
        for algo, seed, result, _ in rows:
            for gen in range(len(result.history)):
                writer.writerow(
                    [
                        algo.value,
                        seed,
                        gen,
                        int(result.history_evals[gen]),
                        _fmt(result.history[gen]),
                        _fmt(result.history_noise_free[gen]),
                    ]
                )
    print(f"{kb.problem.name}: {len(rows)} runs -> {out}")
    print(f"history -> {history_path}")
    if args.plot:
        from . import plots

        curves: dict[str, list] = {}
        for algo, _, result, _ in rows:
            curves.setdefault(algo.value, []).append(
                (result.history_evals, result.history_noise_free)
            )
        png = out.with_name(out.stem + "_convergence.png")
        plots.save_convergence(curves, png, title=kb.problem.name)
        print(f"figure -> {png}")
    return 0


def _load_results(paths) -> dict[str, dict[str, list[float]]]:
    by_problem: dict[str, dict[str, list[float]]] = {}
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"problem", "algorithm", "final_best_noise_free"}
            if not required.issubset(reader.fieldnames or ()):
                raise ValueError(f"{path}: missing columns {sorted(required)}")
            for row in reader:
                problem = by_problem.setdefault(row["problem"], {})
                problem.setdefault(row["algorithm"], []).append(
                    float(row["final_best_noise_free"])
                )
    return by_problem


def cmd_compare(args) -> int:
    by_problem = _load_results(args.inputs)
    if not by_problem:
        raise ValueError("no result rows found")
    for problem, samples in by_problem.items():
        if len(samples) < 2:
            raise ValueError(f"{problem}: ranking needs at least two algorithms")
        counts = {len(vals) for vals in samples.values()}
        if len(counts) > 1:
            print(f"warning: {problem}: unequal run counts {sorted(counts)}", file=sys.stderr)

    out = Path(args.out)
    multiple = len(by_problem) > 1
    for problem, samples in sorted(by_problem.items()):
        report = ranking_groups(samples, alpha=args.alpha)
        path = out.with_name(f"{out.stem}_{problem}{out.suffix}") if multiple else out
        report.to_csv(path)
        print(f"{problem}: {len(report.groups)} groups -> {path}")
        if args.plot:
            from . import plots

            png = path.with_suffix(".png")
            plots.save_ranking(report, png, title=problem)
            print(f"figure -> {png}")
    return 0


def cmd_toy(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dist = (
        FeatureDistribution.gaussian(tuple(args.mean), args.sigma)
        if args.dist == "gaussian"
        else FeatureDistribution.uniform()
    )

    rng = np.random.default_rng(args.seed)
    features = dist.sample(args.tasks, rng)
    optima = np.array([solve(IntervalTask(l1, l2)) for l1, l2 in features])
    mapping_path = outdir / "mapping.csv"
    with open(mapping_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["l1", "l2", "x1", "x2"])
        for (l1, l2), (x1, x2) in zip(features, optima):
            writer.writerow([_fmt(l1), _fmt(l2), _fmt(x1), _fmt(x2)])
    print(f"mapping ({args.tasks} tasks) -> {mapping_path}")

    spaces = [DecisionSpace.square(u) for u in args.spaces]
    coverage_path = outdir / "coverage.csv"
    gammas = {}
    with open(coverage_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["space", "u1", "u2", "grid", "samples", "occupied", "total_cells", "outside", "gamma"]
        )
        for idx, space in enumerate(spaces, start=1):
            cov = optimum_coverage(space, args.coverage_samples, args.grid, dist, args.seed)
            name = f"omega{idx}"
            gammas[name] = cov.gamma
            writer.writerow(
                [
                    name,
                    _fmt(space.upper[0]),
                    _fmt(space.upper[1]),
                    cov.grid,
                    cov.samples,
                    cov.occupied_cells,
                    cov.total_cells,
                    cov.outside,
                    _fmt(cov.gamma),
                ]
            )
    summary = " ".join(f"{name}={gammas[name]:.4f}" for name in gammas)
    print(f"coverage: {summary} -> {coverage_path}")

    sims = toy_similarities(args.tasks, dist, args.seed, DecisionSpace.square(args.hist_space))
    estimate = estimate_density(sims, args.bins)
    hist_path = outdir / "similarity_hist.csv"
    estimate.to_csv(hist_path)
    print(f"similarity histogram -> {hist_path}")

    if args.plot:
        from . import plots

        plots.save_toy_mapping(features, optima, outdir / "mapping.png")
        plots.save_coverage(gammas, outdir / "coverage.png")
        plots.save_similarity_histogram(
            estimate, outdir / "similarity_hist.png", title="toy similarity distribution"
        )
        print(f"figures -> {outdir}")
    return 0


def cmd_sample_similarity(args) -> int:
    spec = _spec_from_args(args)
    values = sample_similarities(spec, args.k, np.random.default_rng(args.seed))
    estimate = estimate_density(values, args.bins)
    analytic = analytic_bin_masses(spec, args.bins) * args.bins
    out = Path(args.out)
    estimate.to_csv(out, analytic_density=analytic)
    print(f"{spec.token}: {args.k} samples -> {out}")
    if args.plot:
        from . import plots

        png = out.with_suffix(".png")
        plots.save_similarity_histogram(estimate, png, analytic, title=spec.token)
        print(f"figure -> {png}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stopgen",
        description="Generate, solve and compare sequential transfer optimization problems.",
        epilog=CSV_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "generate",
        help="generate a problem and build its knowledge base",
        epilog=CSV_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    gen.add_argument("--stop", type=int, choices=range(1, 13), help="benchmark problem id")
    gen.add_argument("--family", help="target family (explicit spec)")
    gen.add_argument("--scenario", help="intra or inter (explicit spec)")
    gen.add_argument("--dist", help="similarity distribution name (explicit spec)")
    gen.add_argument("--knots", help="custom density knots file: 's,density' per line")
    gen.add_argument("--dim", type=int, help="task dimension (explicit spec)")
    gen.add_argument("--k", type=int, required=True, help="number of source tasks")
    gen.add_argument("--seed", type=int, default=0, help="master seed")
    gen.add_argument("--out", help="knowledge base path (default <name>.json)")
    gen.add_argument("--source-budget", type=int, default=5000, help="evaluations per source")
    gen.add_argument("--pop-size", type=int, default=50)
    gen.add_argument("--thin", type=int, default=1, help="store every g-th generation")
    gen.add_argument("--strict", action="store_true", help="resample until similarities are exact")
    gen.add_argument("--bins", type=int, default=20, help="histogram bins for --plot")
    gen.add_argument("--plot", action="store_true", help="render a similarity histogram PNG")
    gen.set_defaults(func=cmd_generate)

    run = sub.add_parser(
        "run",
        help="run algorithms against a knowledge base",
        epilog=CSV_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run.add_argument("--kb", required=True, help="knowledge base JSON")
    run.add_argument(
        "--algos",
        default="N,R,H,E,KLD,WD,OC,ROC,SA",
        help="comma-separated algorithm ids",
    )
    run.add_argument("--runs", type=int, default=30, help="independent runs per algorithm")
    run.add_argument("--seed", type=int, default=0, help="master seed")
    run.add_argument("--budget", type=int, default=5000, help="target evaluations per run")
    run.add_argument("--pop-size", type=int, default=50)
    run.add_argument("--out", default="results.csv", help="results CSV path")
    run.add_argument("--history", help="history CSV path (default <out>_history.csv)")
    run.add_argument("--plot", action="store_true", help="render a convergence PNG")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser(
        "compare",
        help="rank algorithms from results CSVs",
        epilog=CSV_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    cmp_.add_argument("inputs", nargs="+", help="results CSV files from `run`")
    cmp_.add_argument("--alpha", type=float, default=0.05, help="significance level")
    cmp_.add_argument("--out", default="ranking.csv", help="ranking CSV path")
    cmp_.add_argument("--plot", action="store_true", help="render a ranking PNG per problem")
    cmp_.set_defaults(func=cmd_compare)

    toy = sub.add_parser(
        "toy",
        help="run the interval-coverage toy experiments",
        epilog=CSV_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    toy.add_argument("--tasks", type=int, default=1000, help="tasks for mapping and histogram")
    toy.add_argument("--coverage-samples", type=int, default=10000, help="tasks for coverage")
    toy.add_argument("--grid", type=int, default=100, help="coverage grid cells per axis")
    toy.add_argument("--dist", choices=["uniform", "gaussian"], default="uniform")
    toy.add_argument("--mean", type=float, nargs=2, default=[0.5, 0.5], help="gaussian mean")
    toy.add_argument("--sigma", type=float, default=0.15, help="gaussian sigma")
    toy.add_argument("--bins", type=int, default=20)
    toy.add_argument(
        "--spaces", type=float, nargs="+", default=[1.0, 1.4, 6.0], help="square space bounds"
    )
    toy.add_argument("--hist-space", type=float, default=1.4, help="space bound for similarities")
    toy.add_argument("--seed", type=int, default=0)
    toy.add_argument("--outdir", default="toy_out")
    toy.add_argument("--plot", action="store_true", help="render toy figures")
    toy.set_defaults(func=cmd_toy)

    samp = sub.add_parser(
        "sample-similarity",
        help="sample a similarity distribution and histogram it",
        epilog=CSV_SCHEMAS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    samp.add_argument("--dist", required=True, help="distribution name")
    samp.add_argument("--knots", help="custom density knots file")
    samp.add_argument("--k", type=int, required=True, help="number of samples")
    samp.add_argument("--bins", type=int, default=20)
    samp.add_argument("--seed", type=int, default=0)
    samp.add_argument("--out", default="similarity_hist.csv")
    samp.add_argument("--plot", action="store_true", help="render a histogram PNG")
    samp.set_defaults(func=cmd_sample_similarity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
