"""Variable grouping: group-restricted fitting, interaction search, two-stage driver.

`fit_grouped` assigns each tree a group drawn uniformly from a partition and
restricts its splits to that group.  `isg_search` greedily discovers a
partition of second-order interaction pairs by comparing validation errors,
and `gbart_fit` chains the two: search on the data, then a full grouped fit
with the discovered partition.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, train_val_split
from .errors import InsufficientDataError, InvalidInputError, InvalidPartitionError
from .sampler import FitResult, McmcConfig, _run_chain, predict, scale_response
from .seeding import child_seed
from .trees import stump

# spawn-key tags for deterministic seed derivation
_TAG_SPLIT = 1
_TAG_CANDIDATE = 2
_TAG_STAGE2 = 3


@dataclass(frozen=True)
class Partition:
    """Disjoint groups of predictor indices covering {0, ..., p-1}."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(sorted(int(i) for i in g)) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if not groups:
            raise InvalidPartitionError("partition must contain at least one group")
        seen: set[int] = set()
        total = 0
        for g in groups:
            if not g:
                raise InvalidPartitionError("groups must be nonempty")
            total += len(g)
            seen.update(g)
        if len(seen) != total:
            raise InvalidPartitionError("groups must be pairwise disjoint")
        if seen != set(range(len(seen))) or min(seen) != 0:
            raise InvalidPartitionError(
                "groups must cover exactly the indices 0..p-1 with no gaps"
            )

    @property
    def p(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def m(self) -> int:
        return len(self.groups)

    @classmethod
    def trivial(cls, p: int) -> "Partition":
        """The single group containing all p predictors."""
        return cls((tuple(range(p)),))

    @classmethod
    def from_groups(cls, groups) -> "Partition":
        return cls(tuple(tuple(g) for g in groups))

    def to_json(self) -> list[list[int]]:
        return [list(g) for g in self.groups]

    def group_sets(self) -> set[frozenset[int]]:
        return {frozenset(g) for g in self.groups}


@dataclass(frozen=True)
class GroupSearchConfig:
    """Configuration of the two-stage method.

    Attributes:
        stage1_trees: ensemble size for every search fit.
        stage2_trees: ensemble size for the final fit (also used for the
            plain ungrouped baseline).
        val_fraction: share of rows held out for validation in the search.
        stage1_mcmc: sampler settings for search fits; None inherits the
            caller's settings.
        max_rounds: optional cap on accepted search rounds.
    """

    stage1_trees: int = 100
    stage2_trees: int = 200
    val_fraction: float = 0.2
    stage1_mcmc: McmcConfig | None = None
    max_rounds: int | None = None

    def __post_init__(self):
        if self.stage1_trees < 1 or self.stage2_trees < 1:
            raise InvalidInputError("tree counts must be positive")
        if not 0.0 < self.val_fraction < 1.0:
            raise InvalidInputError("val_fraction must lie in (0, 1)")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise InvalidInputError("max_rounds must be positive when given")


@dataclass(frozen=True)
class RoundRecord:
    """Everything measured in one search round."""

    round: int
    e0: float
    ei: dict[int, float]
    i_star: int
    ek: dict[int, float]
    k_star: int
    accepted: bool

    def to_json(self) -> dict:
        return {
            "round": self.round,
            "e0": self.e0,
            "ei": {str(k): v for k, v in sorted(self.ei.items())},
            "i_star": self.i_star,
            "ek": {str(k): v for k, v in sorted(self.ek.items())},
            "k_star": self.k_star,
            "accepted": self.accepted,
        }


@dataclass(frozen=True)
class SearchTrace:
    """Per-round records of a grouping search."""

    rounds: tuple[RoundRecord, ...]

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r.to_json(), sort_keys=True) for r in self.rounds)


def fit_grouped(
    train: Dataset,
    partition: Partition,
    num_trees: int,
    mcmc: McmcConfig,
    seed: int,
) -> FitResult:
    """Fit the sum-of-trees model with group-restricted trees.

    Each of the num_trees trees draws one group uniformly from the partition
    (one RNG draw per tree, consumed even for a single-group partition) and
    keeps it for the whole chain.  With the trivial partition this is plain
    ungrouped BART.
    """
    if not isinstance(partition, Partition):
        partition = Partition.from_groups(partition)
    if partition.p != train.p:
        raise InvalidPartitionError(
            f"partition covers {partition.p} predictors but data has {train.p}"
        )
    y_scaled, transform = scale_response(train.y)
    scaled = Dataset(train.X, y_scaled, train.names)
    config = replace(mcmc, num_trees=num_trees)
    rng = np.random.default_rng(seed)
    group_idx = [int(rng.integers(partition.m)) for _ in range(num_trees)]
    trees = [stump(partition.groups[i]) for i in group_idx]
    result, _ = _run_chain(scaled, trees, config, rng, transform, partition, seed)
    return result


def bart_fit(
    train: Dataset, num_trees: int, mcmc: McmcConfig, seed: int
) -> FitResult:
    """Plain ungrouped fit: the same engine with the trivial partition."""
    return fit_grouped(train, Partition.trivial(train.p), num_trees, mcmc, seed)


def _candidate_mse(args) -> tuple[int, float]:
    """Fit one candidate partition and score it on the validation part.

    Top-level so process pools can pickle it; returns (candidate id, MSE).
    """
    cand_id, train, val, groups, num_trees, mcmc, seed = args
    fit = fit_grouped(train, Partition.from_groups(groups), num_trees, mcmc, seed)
    pred = predict(fit, val.X)
    return cand_id, float(np.mean((val.y - pred) ** 2))


def _run_candidates(jobs, workers: int) -> dict[int, float]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_candidate_mse, jobs))
    else:
        results = dict(_candidate_mse(job) for job in jobs)
    return results


def isg_search(
    data: Dataset,
    cfg: GroupSearchConfig,
    seed: int,
    workers: int = 1,
    mcmc: McmcConfig | None = None,
) -> tuple[Partition, SearchTrace]:
    """Greedy interaction search returning a partition of the predictors.

    Each round fits a benchmark model on the current grouping, isolates the
    variable whose removal from the pool hurts validation error the most,
    searches its best partner, and accepts the pair only if the paired model
    beats the benchmark.  Accepted pairs are kept in every later candidate,
    so all fitted models stay full-dimensional.  The loop stops on the first
    rejected round, at the max_rounds cap, or when at most one free variable
    remains; leftovers form one final group.

    Arguments:
        data: full dataset; split once into train/validation inside.
        cfg: search configuration (tree counts, validation fraction, caps).
        seed: master seed; candidate seeds derive from (seed, round, candidate).
        workers: process count for evaluating candidates within a round.
        mcmc: sampler settings for search fits when cfg.stage1_mcmc is None.

    Returns:
        (partition, trace): the discovered grouping and per-round records.
    """
    if data.p < 2:
        raise InvalidInputError("interaction search needs at least 2 predictors")
    if data.n < 20:
        raise InsufficientDataError(
            f"interaction search needs at least 20 observations, got {data.n}"
        )
    stage1_mcmc = cfg.stage1_mcmc or mcmc or McmcConfig()
    train, val = train_val_split(
        data, cfg.val_fraction, child_seed(seed, _TAG_SPLIT)
    )

    accepted: list[tuple[int, ...]] = []
    pool: list[int] = list(range(data.p))
    records: list[RoundRecord] = []
    round_no = 0

    def cand_seed(cand: int) -> int:
        return child_seed(seed, _TAG_CANDIDATE, round_no, cand)

    def job(cand_id: int, groups: list[tuple[int, ...]]):
        return (
            cand_id,
            train,
            val,
            groups,
            cfg.stage1_trees,
            stage1_mcmc,
            cand_seed(cand_id),
        )

    while len(pool) >= 2:
        round_no += 1
        pool_group = tuple(pool)

        # wave 1: benchmark plus one candidate isolating each free variable
        jobs = [job(0, accepted + [pool_group])]
        iso_ids = {}
        for rank, i in enumerate(pool):
            cand_id = 1 + rank
            iso_ids[cand_id] = i
            rest = tuple(v for v in pool if v != i)
            jobs.append(job(cand_id, accepted + [(i,), rest]))
        wave1 = _run_candidates(jobs, workers)
        e0 = wave1[0]
        ei = {iso_ids[c]: wave1[c] for c in iso_ids}
        i_star = max(sorted(ei), key=lambda i: ei[i])

        # wave 2: pair the isolated variable with each possible partner
        jobs = []
        pair_ids = {}
        offset = 1 + len(pool)
        partners = [k for k in pool if k != i_star]
        for rank, k in enumerate(partners):
            cand_id = offset + rank
            pair_ids[cand_id] = k
            pair = tuple(sorted((i_star, k)))
            rest = tuple(v for v in pool if v not in pair)
            groups = accepted + ([pair, rest] if rest else [pair])
            jobs.append(job(cand_id, groups))
        wave2 = _run_candidates(jobs, workers)
        ek = {pair_ids[c]: wave2[c] for c in pair_ids}
        k_star = min(sorted(ek), key=lambda k: ek[k])

        is_accepted = ek[k_star] < e0
        records.append(
            RoundRecord(round_no, e0, ei, i_star, ek, k_star, is_accepted)
        )
        if not is_accepted:
            break
        accepted.append(tuple(sorted((i_star, k_star))))
        pool = [v for v in pool if v not in (i_star, k_star)]
        if cfg.max_rounds is not None and round_no >= cfg.max_rounds:
            break

    groups = accepted + ([tuple(pool)] if pool else [])
    return Partition.from_groups(groups), SearchTrace(tuple(records))


def stage_two_seed(seed: int) -> int:
    """Seed used for the final grouped fit of a two-stage run with master `seed`."""
    return child_seed(seed, _TAG_STAGE2)


def gbart_fit(
    data: Dataset,
    cfg: GroupSearchConfig,
    mcmc: McmcConfig,
    seed: int,
    workers: int = 1,
    partition: Partition | None = None,
) -> tuple[FitResult, Partition, SearchTrace]:
    """Two-stage fit: discover a grouping, then fit the full data with it.

    Stage 1 runs `isg_search` on the data (skipped when `partition` is
    given); stage 2 runs `fit_grouped` on the full data with stage2_trees
    trees and a seed derived from the master seed.
    """
    if partition is None:
        partition, trace = isg_search(data, cfg, seed, workers=workers, mcmc=mcmc)
    else:
        if not isinstance(partition, Partition):
            partition = Partition.from_groups(partition)
        trace = SearchTrace(())
    fit = fit_grouped(data, partition, cfg.stage2_trees, mcmc, stage_two_seed(seed))
    return fit, partition, trace
