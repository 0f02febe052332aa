"""Command-line entry point: ``fairsel run | compare | metrics``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .classifier import FAST_FOREST, ForestParams
from .compare import (ResultFormatError, build_report, load_results, read_fixture,
                      report_summary, report_table)
from .data import DataError, bundled_configs, load_config, load_problem
from .evolve import FAST_GA, GAParams
from .experiment import ALGORITHMS, ExperimentSpec, dump_json, replay_spec, run_experiment
from .lexico import LexicoParams
from .metrics import MEASURES, fitness_from_predictions

log = logging.getLogger("fairsel")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="dataset config file, or a bundled name: "
                   + ", ".join(bundled_configs()))
    p.add_argument("--replay", metavar="ARTIFACT", help="rerun the spec embedded in a result file")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="both")
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--out", default="results")
    p.add_argument("--fast", action="store_true",
                   help="small forest (10 trees, depth 8), population 20, 10 iterations")
    ga = p.add_argument_group("GA")
    ga.add_argument("--population-size", type=int)
    ga.add_argument("--max-iterations", type=int)
    ga.add_argument("--crossover-prob", type=float)
    ga.add_argument("--mutation-prob", type=float)
    ga.add_argument("--min-p", type=float)
    ga.add_argument("--max-p", type=float)
    ga.add_argument("--tournament-size", type=int)
    ga.add_argument("--folds", dest="n_folds", type=int)
    lx = p.add_argument_group("lexicographic")
    lx.add_argument("--accuracy-eps", type=float)
    lx.add_argument("--fairness-eps", type=float)
    lx.add_argument("--fair-rank-eps", type=int)
    lx.add_argument("--fair-test-eps", type=int)
    rf = p.add_argument_group("forest")
    rf.add_argument("--trees", dest="n_trees", type=int)
    rf.add_argument("--max-depth", type=int)
    rf.add_argument("--min-leaf", type=int)
    rf.add_argument("--no-bootstrap", dest="bootstrap", action="store_false", default=None)
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--test-fraction", type=float, default=0.3)


def _override(base, args, names):
    given = {n: getattr(args, n) for n in names if getattr(args, n) is not None}
    return replace(base, **given)


def spec_from_args(args) -> ExperimentSpec:
    if args.replay:
        return replay_spec(args.replay, out_dir=args.out)
    if not args.config:
        raise SystemExit("run: --config or --replay is required")
    ga = _override(FAST_GA if args.fast else GAParams(), args,
                   ["population_size", "max_iterations", "crossover_prob", "mutation_prob",
                    "min_p", "max_p", "tournament_size", "n_folds"])
    lp = _override(LexicoParams(), args,
                   ["accuracy_eps", "fairness_eps", "fair_rank_eps", "fair_test_eps"])
    fp = _override(FAST_FOREST if args.fast else ForestParams(), args,
                   ["n_trees", "max_depth", "min_leaf", "bootstrap"])
    return ExperimentSpec(config=args.config, algorithm=args.algorithm, ga=ga, lexico=lp,
                          forest=fp, k_neighbors=args.k_neighbors,
                          test_fraction=args.test_fraction, seeds=tuple(args.seeds),
                          out_dir=args.out)


def cmd_run(args) -> int:
    spec = spec_from_args(args)
    paths = run_experiment(spec, echo=log.info)
    for p in paths:
        print(p)
    return 0


def cmd_compare(args) -> int:
    from .plotting import plot_domination, plot_measures

    results = read_fixture() if args.fixture else load_results(args.results)
    report = build_report(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = report_table(report)
    (out / "comparison.csv").write_text(table)
    (out / "summary.json").write_text(dump_json(report_summary(report)))
    plot_measures(report, out / "measures.png")
    plot_domination(report, out / "domination.png")
    sys.stdout.write(table)
    return 0


def _read_predictions(path: str) -> np.ndarray:
    vals = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.lower() in ("pred", "prediction", "y_pred"):
            continue
        vals.append(int(float(line.split(",")[-1])))
    arr = np.array(vals, dtype=np.int64)
    if not np.isin(arr, (0, 1)).all():
        raise DataError("predictions must be 0/1")
    return arr


def cmd_metrics(args) -> int:
    config = load_config(args.config)
    data = load_problem(config)
    pred = _read_predictions(args.predictions)
    if len(pred) != len(data):
        raise DataError(f"{len(pred)} predictions for {len(data)} instances")
    f = fitness_from_predictions(pred, data.y, data.s, data.X, args.k_neighbors)
    if args.json:
        print(json.dumps(f.as_dict(), sort_keys=True))
    else:
        for m in MEASURES:
            print(f"{m}\t{getattr(f, m):.6f}")
        if f.degenerate:
            print("# degenerate: an empty rate denominator was defined as 0")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairsel", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the GA(s) over one or more seeds")
    _add_run_args(run)
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="win counts, Wilcoxon tests and domination stats")
    cmp_.add_argument("results", nargs="*", help="result .json files or fixture .csv tables")
    cmp_.add_argument("--fixture", action="store_true", help="use the bundled published table")
    cmp_.add_argument("--out", default="report")
    cmp_.set_defaults(func=cmd_compare)

    met = sub.add_parser("metrics", help="score an external prediction file")
    met.add_argument("predictions")
    met.add_argument("--config", required=True)
    met.add_argument("--k-neighbors", type=int, default=5)
    met.add_argument("--json", action="store_true")
    met.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if args.command == "compare" and not args.fixture and not args.results:
        print("fairsel compare: give result files or --fixture", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (DataError, ResultFormatError, ValueError, OSError) as exc:
        print(f"fairsel {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
