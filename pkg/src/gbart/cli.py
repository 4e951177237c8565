"""Command-line interface.

Subcommands:
    gen-data      draw a synthetic dataset and write it as CSV
    group-search  discover a variable grouping, write partition + trace
    fit           fit a model (with a given partition, with search, or plain)
    predict       score a fitted model file on a CSV of predictors
    benchmark     run a plan file, write the result table as CSV and JSON

Exit codes: 0 success, 1 usage error, 2 data or compute error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .bench import load_plan, run_benchmark
from .data import generate_synthetic, load_csv
from .errors import GbartError
from .grouping import (
    GroupSearchConfig,
    Partition,
    fit_grouped,
    gbart_fit,
    isg_search,
)
from .sampler import McmcConfig, load_model, predict, save_model


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageError(message)


def _add_mcmc_flags(sub):
    sub.add_argument("--num-trees", type=int, default=200)
    sub.add_argument("--ndpost", type=int, default=300)
    sub.add_argument("--burn-in", type=int, default=100)


def _mcmc_from(args) -> McmcConfig:
    return McmcConfig(
        num_trees=args.num_trees, ndpost=args.ndpost, burn_in=args.burn_in
    )


def _add_input_flags(sub):
    src = sub.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", help="input CSV file with a header row")
    src.add_argument("--case", type=int, help="synthetic case number, 1-12")
    sub.add_argument("--target", help="target column (name or index) for --csv")
    sub.add_argument(
        "--drop", nargs="*", default=[], help="columns to exclude from predictors"
    )
    sub.add_argument("--n", type=int, default=500, help="rows for --case")
    sub.add_argument("--data-seed", type=int, default=0, help="seed for --case")


def _parse_column(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def _load_input(args):
    if args.csv is not None:
        if args.target is None:
            raise GbartError("--target is required with --csv")
        return load_csv(
            args.csv, _parse_column(args.target), [_parse_column(c) for c in args.drop]
        )
    return generate_synthetic(args.case, args.n, args.data_seed)


def _write_dataset_csv(data, path):
    names = data.names or tuple(f"x{j + 1}" for j in range(data.p))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + ["y"])
        for i in range(data.n):
            writer.writerow(
                [repr(float(v)) for v in data.X[i]] + [repr(float(data.y[i]))]
            )


def build_parser() -> _Parser:
    parser = _Parser(prog="gbart", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="write a synthetic dataset to CSV")
    gen.add_argument("--case", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)

    search = commands.add_parser("group-search", help="discover a variable grouping")
    _add_input_flags(search)
    search.add_argument("--seed", type=int, default=0)
    search.add_argument("--stage1-trees", type=int, default=100)
    search.add_argument("--val-fraction", type=float, default=0.2)
    search.add_argument("--max-rounds", type=int, default=None)
    search.add_argument("--ndpost", type=int, default=300)
    search.add_argument("--burn-in", type=int, default=100)
    search.add_argument("--workers", type=int, default=1)
    search.add_argument("--out-partition", required=True)
    search.add_argument("--out-trace", help="optional JSONL trace file")

    fit = commands.add_parser("fit", help="fit a model and write a model file")
    _add_input_flags(fit)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument(
        "--partition", help="partition JSON file; restricts trees to its groups"
    )
    fit.add_argument(
        "--search",
        action="store_true",
        help="run the grouping search first (two-stage fit)",
    )
    _add_mcmc_flags(fit)
    fit.add_argument("--stage1-trees", type=int, default=100)
    fit.add_argument("--workers", type=int, default=1)
    fit.add_argument("--out", required=True)

    pred = commands.add_parser("predict", help="score a model file on a CSV")
    pred.add_argument("--model", required=True)
    pred.add_argument("--csv", required=True)
    pred.add_argument("--target", help="column to exclude (e.g. the response)")
    pred.add_argument("--drop", nargs="*", default=[])
    pred.add_argument("--out", required=True)

    bench = commands.add_parser("benchmark", help="run a benchmark plan file")
    bench.add_argument("--plan", required=True)
    bench.add_argument("--out", required=True, help="output prefix (.csv and .json)")
    bench.add_argument("--workers", type=int, default=None, help="override plan workers")
    return parser


def _cmd_gen_data(args) -> int:
    data = generate_synthetic(args.case, args.n, args.seed)
    _write_dataset_csv(data, args.out)
    print(f"wrote {data.n} rows x {data.p + 1} columns to {args.out}")
    return 0


def _cmd_group_search(args) -> int:
    data = _load_input(args)
    cfg = GroupSearchConfig(
        stage1_trees=args.stage1_trees,
        val_fraction=args.val_fraction,
        max_rounds=args.max_rounds,
        stage1_mcmc=McmcConfig(
            num_trees=args.stage1_trees, ndpost=args.ndpost, burn_in=args.burn_in
        ),
    )
    partition, trace = isg_search(data, cfg, args.seed, workers=args.workers)
    with open(args.out_partition, "w") as fh:
        json.dump(partition.to_json(), fh)
        fh.write("\n")
    if args.out_trace:
        with open(args.out_trace, "w") as fh:
            fh.write(trace.to_jsonl() + "\n")
    print(f"partition: {partition.to_json()}")
    return 0


def _cmd_fit(args) -> int:
    data = _load_input(args)
    mcmc = _mcmc_from(args)
    if args.partition:
        with open(args.partition) as fh:
            partition = Partition.from_groups(json.load(fh))
        fit = fit_grouped(data, partition, args.num_trees, mcmc, args.seed)
    elif args.search:
        cfg = GroupSearchConfig(
            stage1_trees=args.stage1_trees, stage2_trees=args.num_trees
        )
        fit, partition, _ = gbart_fit(
            data, cfg, mcmc, args.seed, workers=args.workers
        )
        print(f"discovered partition: {partition.to_json()}")
    else:
        fit = fit_grouped(
            data, Partition.trivial(data.p), args.num_trees, mcmc, args.seed
        )
    save_model(fit, args.out)
    print(f"wrote model with {len(fit.snapshots)} snapshots to {args.out}")
    return 0


def _cmd_predict(args) -> int:
    fit = load_model(args.model)
    drop = [_parse_column(c) for c in args.drop]
    if args.target is not None:
        data = load_csv(args.csv, _parse_column(args.target), drop)
        X = data.X
    else:
        # no target column: read every column as a predictor
        with open(args.csv, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            rows = [[float(c) for c in record] for record in reader if record]
        X = np.asarray(rows)
    preds = predict(fit, X)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for v in preds:
            writer.writerow([repr(float(v))])
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


def _cmd_benchmark(args) -> int:
    plan = load_plan(args.plan)
    if args.workers is not None:
        from dataclasses import replace

        plan = replace(plan, workers=args.workers)
    table = run_benchmark(plan)
    csv_path = args.out + ".csv"
    json_path = args.out + ".json"
    with open(csv_path, "w") as fh:
        fh.write(table.to_csv())
    with open(json_path, "w") as fh:
        fh.write(table.to_json())
    print(table.to_csv(), end="")
    print(f"wrote {csv_path} and {json_path}")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "group-search": _cmd_group_search,
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "benchmark": _cmd_benchmark,
}


def cli_main(argv: list[str] | None = None) -> int:
    """Run one CLI command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("run 'gbart --help' for usage", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (GbartError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:  # console entry point
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
