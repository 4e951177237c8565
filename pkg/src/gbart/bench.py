"""Cross-validated benchmark harness comparing grouped and plain fits.

A plan enumerates datasets, methods, and replication counts; every
(dataset, method, replication) cell is an independent job whose seed
derives from its own coordinates, so cells can run in any order and on any
number of workers without changing a single value.
"""

from __future__ import annotations

import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset, generate_synthetic, kfold_split, load_csv
from .errors import DegenerateResponseError, GbartError, InvalidInputError
from .grouping import (
    GroupSearchConfig,
    Partition,
    fit_grouped,
    gbart_fit,
    stage_two_seed,
)
from .sampler import McmcConfig, predict
from .seeding import child_seed, string_tag

METHODS = ("GBART", "BART")

_TAG_FOLDS = 11
_TAG_FIT = 12
_TAG_DATA = 13
_TAG_CELL = 14


@dataclass(frozen=True)
class DatasetSpec:
    """One benchmark dataset: a synthetic case or a CSV file with a target."""

    case: int | None = None
    n: int | None = None
    path: str | None = None
    target: str | int | None = None
    drop: tuple[str | int, ...] = ()

    def __post_init__(self):
        if (self.case is None) == (self.path is None):
            raise InvalidInputError(
                "dataset spec must name either a synthetic case or a CSV path"
            )
        if self.path is not None and self.target is None:
            raise InvalidInputError("CSV dataset spec needs a target column")

    @property
    def spec_id(self) -> str:
        if self.case is not None:
            return f"case:{self.case}:n={self.n}"
        drop = f":drop={'|'.join(str(d) for d in self.drop)}" if self.drop else ""
        return f"csv:{self.path}:target={self.target}{drop}"

    def realize(self, seed: int) -> Dataset:
        """Materialize the dataset; synthetic cases draw fresh data per seed."""
        if self.case is not None:
            return generate_synthetic(self.case, self.n or 500, seed)
        return load_csv(self.path, self.target, list(self.drop))


def _parse_column(token: str) -> str | int:
    try:
        return int(token)
    except ValueError:
        return token


def parse_dataset_spec(token: str) -> DatasetSpec:
    """Parse a dataset token: `case:K[:n=N]` or `csv:PATH:target=COL[:drop=A|B]`."""
    parts = token.strip().split(":")
    kind = parts[0].lower()
    if kind == "case":
        if len(parts) < 2:
            raise InvalidInputError(f"bad dataset spec {token!r}")
        case = int(parts[1])
        n = 500
        for extra in parts[2:]:
            key, _, value = extra.partition("=")
            if key != "n":
                raise InvalidInputError(f"unknown dataset option {extra!r}")
            n = int(value)
        return DatasetSpec(case=case, n=n)
    if kind == "csv":
        if len(parts) < 3:
            raise InvalidInputError(f"bad dataset spec {token!r}")
        path = parts[1]
        target: str | int | None = None
        drop: tuple[str | int, ...] = ()
        for extra in parts[2:]:
            key, _, value = extra.partition("=")
            if key == "target":
                target = _parse_column(value)
            elif key == "drop":
                drop = tuple(_parse_column(v) for v in value.split("|") if v)
            else:
                raise InvalidInputError(f"unknown dataset option {extra!r}")
        return DatasetSpec(path=path, target=target, drop=drop)
    raise InvalidInputError(f"dataset spec must start with 'case:' or 'csv:': {token!r}")


# Desk-scale defaults: short chains and few replications so a full table
# finishes in minutes; the original protocol (30 replications, 1000 draws)
# is reached by overriding these in the plan.
def _default_mcmc() -> McmcConfig:
    return McmcConfig(ndpost=300, burn_in=100)


@dataclass(frozen=True)
class BenchmarkPlan:
    """A full benchmark: datasets x methods x replications under one master seed."""

    datasets: tuple[DatasetSpec, ...]
    methods: tuple[str, ...] = METHODS
    folds: int = 5
    replications: int = 5
    master_seed: int = 0
    mcmc: McmcConfig = field(default_factory=_default_mcmc)
    search: GroupSearchConfig = field(default_factory=GroupSearchConfig)
    workers: int = 1
    timing: bool = True

    def __post_init__(self):
        if not self.datasets:
            raise InvalidInputError("plan needs at least one dataset")
        methods = tuple(m.upper() for m in self.methods)
        if not methods:
            raise InvalidInputError("plan needs at least one method")
        for m in methods:
            if m not in METHODS:
                raise InvalidInputError(f"unknown method {m!r}; choose from {METHODS}")
        object.__setattr__(self, "methods", methods)
        if self.folds < 2:
            raise InvalidInputError("folds must be at least 2")
        if self.replications < 1:
            raise InvalidInputError("replications must be at least 1")
        if self.workers < 1:
            raise InvalidInputError("workers must be at least 1")


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    method: str
    mean_mse: float
    std_err: float
    mses: tuple[float, ...]
    wall_time_s: float


@dataclass(frozen=True)
class ResultTable:
    """Aggregated benchmark results, one row per (dataset, method)."""

    rows: tuple[ResultRow, ...]

    def to_csv(self) -> str:
        lines = ["dataset,method,mean_mse,std_err,replications,wall_time_s"]
        for r in self.rows:
            lines.append(
                f"{r.dataset},{r.method},{r.mean_mse!r},{r.std_err!r},"
                f"{len(r.mses)},{r.wall_time_s!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        rows = [
            {
                "dataset": r.dataset,
                "method": r.method,
                "mean_mse": r.mean_mse,
                "std_err": r.std_err,
                "replications": len(r.mses),
                "wall_time_s": r.wall_time_s,
                "mses": list(r.mses),
            }
            for r in self.rows
        ]
        return json.dumps({"rows": rows}, sort_keys=True, indent=2) + "\n"

    def row(self, dataset: str, method: str) -> ResultRow:
        for r in self.rows:
            if r.dataset == dataset and r.method == method:
                return r
        raise KeyError((dataset, method))


def _aggregate(dataset: str, method: str, mses: list[float], wall: float) -> ResultRow:
    mses_t = tuple(float(m) for m in mses)
    mean = float(np.mean(mses_t))
    if len(mses_t) == 1:
        warnings.warn(
            "standard error of a single replication reported as 0", stacklevel=2
        )
        se = 0.0
    else:
        se = float(np.std(mses_t, ddof=1) / np.sqrt(len(mses_t)))
    return ResultRow(dataset, method, mean, se, mses_t, wall)


def evaluate_method(
    data: Dataset,
    method: str,
    folds: int,
    mcmc: McmcConfig,
    search_cfg: GroupSearchConfig,
    seed: int,
    partition: Partition | None = None,
    workers: int = 1,
) -> float:
    """K-fold cross-validated MSE of one method on one dataset.

    GBART runs the full two-stage fit per fold; BART fits the trivial
    partition with the stage-2 ensemble size.  Squared errors are pooled
    over all held-out points.  A constant-response training fold falls back
    to predicting its mean.
    """
    method = method.upper()
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}")
    fold_spec = kfold_split(data.n, folds, child_seed(seed, _TAG_FOLDS))
    sq_errors = np.empty(data.n)
    for f in range(folds):
        train = data.subset(fold_spec.train_rows(f))
        test_rows = fold_spec.test_rows(f)
        test = data.subset(test_rows)
        fit_seed = child_seed(seed, _TAG_FIT, f)
        try:
            if method == "BART":
                fit = fit_grouped(
                    train,
                    Partition.trivial(train.p),
                    search_cfg.stage2_trees,
                    mcmc,
                    stage_two_seed(fit_seed),
                )
            else:
                fit, _, _ = gbart_fit(
                    train,
                    search_cfg,
                    mcmc,
                    fit_seed,
                    workers=workers,
                    partition=partition,
                )
            pred = predict(fit, test.X)
        except DegenerateResponseError:
            pred = np.full(test.n, float(train.y.mean()))
        sq_errors[test_rows] = (test.y - pred) ** 2
    return float(sq_errors.mean())


def _run_cell(args) -> tuple[tuple[str, str, int], float, float]:
    spec, method, rep, plan = args
    start = time.perf_counter() if plan.timing else 0.0
    data = spec.realize(child_seed(plan.master_seed, _TAG_DATA, string_tag(spec.spec_id), rep))
    cell_seed = child_seed(
        plan.master_seed, _TAG_CELL, string_tag(spec.spec_id), string_tag(method), rep
    )
    mse = evaluate_method(
        data, method, plan.folds, plan.mcmc, plan.search, cell_seed
    )
    wall = (time.perf_counter() - start) if plan.timing else 0.0
    return (spec.spec_id, method, rep), mse, wall


def run_benchmark(plan: BenchmarkPlan) -> ResultTable:
    """Run every (dataset, method, replication) cell and aggregate the table.

    Synthetic datasets are redrawn per replication; CSV datasets re-sample
    the cross-validation folds instead.  Cells are independent jobs; with
    plan.workers > 1 they run in a process pool, with identical output.
    """
    jobs = [
        (spec, method, rep, plan)
        for spec in plan.datasets
        for method in plan.methods
        for rep in range(plan.replications)
    ]
    if plan.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            outcomes = list(pool.map(_run_cell, jobs))
    else:
        outcomes = [_run_cell(j) for j in jobs]

    by_cell = {key: (mse, wall) for key, mse, wall in outcomes}
    rows = []
    for spec in plan.datasets:
        for method in plan.methods:
            mses = []
            wall = 0.0
            for rep in range(plan.replications):
                mse, w = by_cell[(spec.spec_id, method, rep)]
                mses.append(mse)
                wall += w
            rows.append(_aggregate(spec.spec_id, method, mses, wall))
    return ResultTable(tuple(rows))


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "on", "yes"):
        return True
    if v in ("0", "false", "off", "no"):
        return False
    raise InvalidInputError(f"expected a boolean, got {value!r}")


_MCMC_FIELDS = {
    "num_trees": int,
    "ndpost": int,
    "burn_in": int,
    "alpha": float,
    "beta": float,
    "k": float,
    "nu": float,
    "q": float,
    "num_cutpoints": int,
}

_SEARCH_FIELDS = {
    "stage1_trees": int,
    "stage2_trees": int,
    "val_fraction": float,
    "max_rounds": int,
}


def parse_plan(text: str) -> BenchmarkPlan:
    """Parse a flat key=value plan file.

    Recognized keys: datasets (comma-separated dataset tokens), methods,
    folds, replications, master_seed, workers, timing, and dotted
    mcmc.<field> / search.<field> overrides.  Lines starting with '#' are
    comments.
    """
    datasets: tuple[DatasetSpec, ...] = ()
    kwargs: dict = {}
    mcmc_over: dict = {}
    search_over: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidInputError(f"plan line {lineno}: expected key=value, got {raw!r}")
        key = key.strip()
        value = value.strip()
        if key == "datasets":
            datasets = tuple(
                parse_dataset_spec(tok) for tok in value.split(",") if tok.strip()
            )
        elif key == "methods":
            kwargs["methods"] = tuple(
                m.strip() for m in value.split(",") if m.strip()
            )
        elif key == "folds":
            kwargs["folds"] = int(value)
        elif key == "replications":
            kwargs["replications"] = int(value)
        elif key == "master_seed":
            kwargs["master_seed"] = int(value)
        elif key == "workers":
            kwargs["workers"] = int(value)
        elif key == "timing":
            kwargs["timing"] = _parse_bool(value)
        elif key.startswith("mcmc."):
            name = key[5:]
            if name not in _MCMC_FIELDS:
                raise InvalidInputError(f"plan line {lineno}: unknown mcmc key {name!r}")
            mcmc_over[name] = _MCMC_FIELDS[name](value)
        elif key.startswith("search."):
            name = key[7:]
            if name not in _SEARCH_FIELDS:
                raise InvalidInputError(
                    f"plan line {lineno}: unknown search key {name!r}"
                )
            search_over[name] = _SEARCH_FIELDS[name](value)
        else:
            raise InvalidInputError(f"plan line {lineno}: unknown key {key!r}")
    if not datasets:
        raise InvalidInputError("plan must list at least one dataset")
    mcmc = replace(_default_mcmc(), **mcmc_over)
    search = GroupSearchConfig(**search_over)
    return BenchmarkPlan(datasets=datasets, mcmc=mcmc, search=search, **kwargs)


def load_plan(path: str) -> BenchmarkPlan:
    with open(path) as fh:
        return parse_plan(fh.read())
