"""Tests for partitions, group-restricted fitting, and the interaction search."""

import json
import math

import numpy as np
import pytest

from gbart import (
    Dataset,
    GroupSearchConfig,
    InsufficientDataError,
    InvalidPartitionError,
    McmcConfig,
    Partition,
    bart_fit,
    fit_grouped,
    gbart_fit,
    generate_synthetic,
    isg_search,
    kfold_split,
    model_to_json,
    predict,
    stage_two_seed,
)

TINY = McmcConfig(ndpost=40, burn_in=10)
SMALL = McmcConfig(ndpost=100, burn_in=40)


class TestPartition:
    def test_valid_partition(self):
        p = Partition.from_groups([[0, 1], [3, 2], [4]])
        assert p.groups == ((0, 1), (2, 3), (4,))
        assert p.p == 5 and p.m == 3

    def test_trivial(self):
        assert Partition.trivial(3).groups == ((0, 1, 2),)

    def test_overlap_rejected(self):
        with pytest.raises(InvalidPartitionError, match="disjoint"):
            Partition.from_groups([[0, 1], [1, 2]])

    def test_gap_rejected(self):
        with pytest.raises(InvalidPartitionError, match="cover"):
            Partition.from_groups([[0, 1], [3]])

    def test_empty_group_rejected(self):
        with pytest.raises(InvalidPartitionError, match="nonempty"):
            Partition.from_groups([[0, 1], []])

    def test_json_round_trip(self):
        p = Partition.from_groups([[2, 3], [0, 1]])
        assert Partition.from_groups(json.loads(json.dumps(p.to_json()))) == p


class TestFitGrouped:
    def test_trivial_partition_is_bit_identical_to_plain_fit(self):
        data = generate_synthetic(2, 120, seed=0)
        a = fit_grouped(data, Partition.trivial(6), 20, TINY, seed=5)
        b = bart_fit(data, 20, TINY, seed=5)
        assert model_to_json(a) == model_to_json(b)

    def test_partition_mismatch_rejected(self):
        data = generate_synthetic(2, 50, seed=0)
        with pytest.raises(InvalidPartitionError):
            fit_grouped(data, Partition.trivial(4), 10, TINY, seed=0)

    def test_trees_respect_their_groups(self):
        data = generate_synthetic(2, 200, seed=1)
        part = Partition.from_groups([[0, 1], [2, 3], [4, 5]])
        fit = fit_grouped(data, part, 12, SMALL, seed=2)
        group_sets = part.group_sets()
        for snap in fit.snapshots:
            for tree in snap.trees:
                assert frozenset(tree.group) in group_sets
                for nid in tree.internal_ids:
                    assert tree.nodes[nid].rule.variable in tree.group

    def test_all_groups_get_trees(self):
        data = generate_synthetic(2, 100, seed=1)
        part = Partition.from_groups([[0, 1], [2, 3], [4, 5]])
        fit = fit_grouped(data, part, 30, TINY, seed=3)
        groups_used = {tree.group for tree in fit.snapshots[0].trees}
        assert len(groups_used) == 3

    def test_constant_signal_recovers_the_level(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(150, 3))
        y = 3.0 + rng.normal(scale=0.01, size=150)
        data = Dataset(X, y)
        fit = bart_fit(data, 20, SMALL, seed=0)
        pred = predict(fit, X)
        assert np.abs(pred - 3.0).max() < 0.1

    def test_beats_the_mean_predictor_in_cv(self):
        """5-fold CV against the constant-mean baseline on pair data, n=500."""
        data = generate_synthetic(2, 500, seed=7)
        part = Partition.from_groups([[0, 1], [2, 3], [4, 5]])
        folds = kfold_split(data.n, 5, seed=0)
        model_se = np.empty(data.n)
        mean_se = np.empty(data.n)
        for f in range(5):
            train = data.subset(folds.train_rows(f))
            test_rows = folds.test_rows(f)
            test = data.subset(test_rows)
            fit = fit_grouped(train, part, 50, SMALL, seed=f)
            model_se[test_rows] = (test.y - predict(fit, test.X)) ** 2
            mean_se[test_rows] = (test.y - train.y.mean()) ** 2
        assert model_se.mean() < mean_se.mean()


class TestIsgSearch:
    def test_two_predictor_degenerate_case(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(80, 2))
        y = X[:, 0] * X[:, 1] + rng.normal(scale=0.2, size=80)
        part, trace = isg_search(
            Dataset(X, y), GroupSearchConfig(stage1_trees=10), seed=1, mcmc=TINY
        )
        # whatever the trace decided, the result partitions {0, 1}
        assert part.p == 2
        assert part.group_sets() in ({frozenset({0, 1})}, {frozenset({0}), frozenset({1})})
        assert len(trace.rounds) == 1

    def test_preconditions(self):
        rng = np.random.default_rng(0)
        with pytest.raises(InsufficientDataError):
            isg_search(
                Dataset(rng.normal(size=(10, 3)), rng.normal(size=10)),
                GroupSearchConfig(),
                seed=0,
            )

    def test_determinism(self):
        data = generate_synthetic(3, 150, seed=2)
        cfg = GroupSearchConfig(stage1_trees=15, stage1_mcmc=TINY)
        a = isg_search(data, cfg, seed=9)
        b = isg_search(data, cfg, seed=9)
        assert a[0] == b[0]
        assert a[1] == b[1]

    def test_trace_invariants(self):
        data = generate_synthetic(2, 200, seed=5)
        cfg = GroupSearchConfig(stage1_trees=20, stage1_mcmc=TINY)
        part, trace = isg_search(data, cfg, seed=3)
        assert 1 <= len(trace.rounds) <= 3  # floor(p/2) with p=6
        for idx, rec in enumerate(trace.rounds):
            assert rec.round == idx + 1
            assert rec.i_star in rec.ei
            assert rec.i_star not in rec.ek
            assert rec.k_star in rec.ek
            assert rec.accepted == (rec.ek[rec.k_star] < rec.e0)
            assert max(rec.ei, key=lambda i: (rec.ei[i], -i)) == rec.i_star
            assert min(rec.ek, key=lambda k: (rec.ek[k], k)) == rec.k_star
        # only the last round may be rejected
        for rec in trace.rounds[:-1]:
            assert rec.accepted
        # group shapes: accepted rounds yield pairs, plus at most one remainder
        sizes = sorted(len(g) for g in part.groups)
        assert sum(sizes) == 6
        non_pairs = [s for s in sizes if s != 2]
        assert len(non_pairs) <= 1

    def test_max_rounds_cap(self):
        data = generate_synthetic(2, 200, seed=6)
        cfg = GroupSearchConfig(stage1_trees=15, stage1_mcmc=TINY, max_rounds=1)
        part, trace = isg_search(data, cfg, seed=4)
        assert len(trace.rounds) == 1

    def test_workers_do_not_change_the_result(self):
        data = generate_synthetic(3, 120, seed=8)
        cfg = GroupSearchConfig(stage1_trees=10, stage1_mcmc=TINY, max_rounds=1)
        serial = isg_search(data, cfg, seed=2, workers=1)
        parallel = isg_search(data, cfg, seed=2, workers=3)
        assert serial[0] == parallel[0]
        assert serial[1] == parallel[1]

    def test_single_interaction_is_found_first(self):
        """On y = x1*x2 + x3 + x4 + x5 + eps the only interacting pair is
        {0, 1}; the first accepted group is that pair in a majority of 10
        seeded runs.  Short chains keep this affordable (~2 minutes)."""
        cfg = GroupSearchConfig(
            stage1_trees=50,
            stage1_mcmc=McmcConfig(ndpost=150, burn_in=50),
            max_rounds=1,
        )
        hits = 0
        for run in range(10):
            data = generate_synthetic(3, 500, seed=2000 + run)
            _, trace = isg_search(data, cfg, seed=run)
            first = trace.rounds[0]
            hits += first.accepted and {first.i_star, first.k_star} == {0, 1}
        assert hits >= 6

    def test_trace_jsonl(self):
        data = generate_synthetic(2, 150, seed=5)
        cfg = GroupSearchConfig(stage1_trees=10, stage1_mcmc=TINY, max_rounds=1)
        _, trace = isg_search(data, cfg, seed=3)
        lines = trace.to_jsonl().splitlines()
        assert len(lines) == len(trace.rounds)
        rec = json.loads(lines[0])
        assert set(rec) == {"round", "e0", "ei", "i_star", "ek", "k_star", "accepted"}


class TestGbartFit:
    def test_full_determinism(self):
        data = generate_synthetic(3, 150, seed=1)
        cfg = GroupSearchConfig(stage1_trees=10, stage2_trees=15, stage1_mcmc=TINY)
        a_fit, a_part, a_trace = gbart_fit(data, cfg, TINY, seed=12)
        b_fit, b_part, b_trace = gbart_fit(data, cfg, TINY, seed=12)
        assert a_part == b_part
        assert a_trace == b_trace
        assert model_to_json(a_fit) == model_to_json(b_fit)

    def test_forced_trivial_partition_equals_plain_fit(self):
        """With the search skipped, the two-stage fit is plain ungrouped fitting."""
        data = generate_synthetic(2, 120, seed=2)
        cfg = GroupSearchConfig(stage2_trees=20)
        fit, part, trace = gbart_fit(
            data, cfg, TINY, seed=3, partition=Partition.trivial(6)
        )
        plain = bart_fit(data, 20, TINY, seed=stage_two_seed(3))
        assert trace.rounds == ()
        assert model_to_json(fit) == model_to_json(plain)

    def test_stage2_uses_the_discovered_partition(self):
        data = generate_synthetic(2, 150, seed=9)
        cfg = GroupSearchConfig(stage1_trees=10, stage2_trees=12, stage1_mcmc=TINY)
        fit, part, _ = gbart_fit(data, cfg, TINY, seed=5)
        assert fit.partition == part
        group_sets = part.group_sets()
        for tree in fit.snapshots[0].trees:
            assert frozenset(tree.group) in group_sets
