"""Tests for the benchmark harness: plans, evaluation, aggregation, determinism."""

import numpy as np
import pytest

from gbart import (
    BenchmarkPlan,
    Dataset,
    DatasetSpec,
    GroupSearchConfig,
    InvalidInputError,
    McmcConfig,
    Partition,
    evaluate_method,
    generate_synthetic,
    parse_dataset_spec,
    parse_plan,
    run_benchmark,
)
from gbart.bench import _aggregate

TINY = McmcConfig(ndpost=30, burn_in=10)
TINY_SEARCH = GroupSearchConfig(stage1_trees=8, stage2_trees=10, stage1_mcmc=TINY)


class TestDatasetSpec:
    def test_parse_synthetic(self):
        spec = parse_dataset_spec("case:2:n=500")
        assert spec.case == 2 and spec.n == 500
        assert spec.spec_id == "case:2:n=500"

    def test_parse_synthetic_default_n(self):
        assert parse_dataset_spec("case:12").n == 500

    def test_parse_csv(self):
        spec = parse_dataset_spec("csv:data/slump.csv:target=SLUMP(cm):drop=A|B")
        assert spec.path == "data/slump.csv"
        assert spec.target == "SLUMP(cm)"
        assert spec.drop == ("A", "B")

    def test_bad_specs_rejected(self):
        with pytest.raises(InvalidInputError):
            parse_dataset_spec("parquet:foo")
        with pytest.raises(InvalidInputError):
            parse_dataset_spec("case:2:k=3")

    def test_synthetic_redraws_by_seed(self):
        spec = parse_dataset_spec("case:2:n=50")
        a, b = spec.realize(1), spec.realize(2)
        assert not np.array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.y, spec.realize(1).y)


class TestResultAggregation:
    def test_hand_fed_mses(self):
        # oracle: mean of {1,2,3} is 2; SE = sd/sqrt(3) = 1/sqrt(3)
        row = _aggregate("d", "BART", [1.0, 2.0, 3.0], 0.0)
        assert row.mean_mse == 2.0
        assert row.std_err == pytest.approx(1.0 / np.sqrt(3.0), abs=1e-15)
        assert row.std_err == pytest.approx(0.5773502691896258, abs=1e-12)

    def test_single_replication_reports_zero_se_with_warning(self):
        with pytest.warns(UserWarning, match="single replication"):
            row = _aggregate("d", "BART", [1.5], 0.0)
        assert row.std_err == 0.0


class TestEvaluateMethod:
    def test_constant_response_falls_back_to_the_mean(self):
        rng = np.random.default_rng(0)
        data = Dataset(rng.normal(size=(40, 2)), np.full(40, 7.0))
        mse = evaluate_method(data, "BART", 4, TINY, TINY_SEARCH, seed=0)
        assert mse < 1e-3

    def test_forced_trivial_gbart_equals_bart(self):
        data = generate_synthetic(2, 80, seed=1)
        kwargs = dict(folds=3, mcmc=TINY, search_cfg=TINY_SEARCH, seed=42)
        a = evaluate_method(data, "GBART", partition=Partition.trivial(6), **kwargs)
        b = evaluate_method(data, "BART", **kwargs)
        assert a == b

    def test_beats_mean_predictor_on_interaction_data(self):
        data = generate_synthetic(2, 500, seed=3)
        mcmc = McmcConfig(ndpost=80, burn_in=30)
        cfg = GroupSearchConfig(stage2_trees=40)
        mse = evaluate_method(data, "BART", 5, mcmc, cfg, seed=0)
        # mean-predictor CV baseline
        from gbart import kfold_split

        folds = kfold_split(data.n, 5, seed=123)
        base = np.empty(data.n)
        for f in range(5):
            rows = folds.test_rows(f)
            base[rows] = (data.y[rows] - data.y[folds.train_rows(f)].mean()) ** 2
        assert mse < base.mean()

    def test_unknown_method_rejected(self):
        data = generate_synthetic(2, 60, seed=0)
        with pytest.raises(InvalidInputError):
            evaluate_method(data, "RF", 3, TINY, TINY_SEARCH, seed=0)


def _tiny_plan(**kwargs):
    defaults = dict(
        datasets=(parse_dataset_spec("case:2:n=60"),),
        methods=("BART",),
        folds=3,
        replications=2,
        master_seed=5,
        mcmc=TINY,
        search=TINY_SEARCH,
    )
    defaults.update(kwargs)
    return BenchmarkPlan(**defaults)


class TestRunBenchmark:
    def test_shape_and_arithmetic(self):
        table = run_benchmark(_tiny_plan())
        assert len(table.rows) == 1
        row = table.rows[0]
        assert row.dataset == "case:2:n=60" and row.method == "BART"
        assert len(row.mses) == 2
        assert row.mean_mse == pytest.approx(np.mean(row.mses))
        assert row.std_err == pytest.approx(
            np.std(row.mses, ddof=1) / np.sqrt(2), abs=1e-15
        )

    def test_determinism_and_worker_invariance(self):
        plan1 = _tiny_plan(timing=False)
        plan2 = _tiny_plan(timing=False, workers=3)
        t1 = run_benchmark(plan1)
        t2 = run_benchmark(plan1)
        t3 = run_benchmark(plan2)
        assert t1.to_csv() == t2.to_csv() == t3.to_csv()
        assert t1.to_json() == t3.to_json()

    def test_dataset_order_does_not_change_cell_values(self):
        d1 = parse_dataset_spec("case:2:n=60")
        d2 = parse_dataset_spec("case:3:n=60")
        a = run_benchmark(_tiny_plan(datasets=(d1, d2), timing=False))
        b = run_benchmark(_tiny_plan(datasets=(d2, d1), timing=False))
        assert a.row("case:2:n=60", "BART") == b.row("case:2:n=60", "BART")
        assert a.row("case:3:n=60", "BART") == b.row("case:3:n=60", "BART")

    def test_csv_format(self):
        table = run_benchmark(_tiny_plan(timing=False))
        lines = table.to_csv().splitlines()
        assert lines[0] == "dataset,method,mean_mse,std_err,replications,wall_time_s"
        cells = lines[1].split(",")
        assert cells[:2] == ["case:2:n=60", "BART"]
        assert int(cells[4]) == 2
        assert float(cells[5]) == 0.0

    def test_csv_dataset_resamples_folds_per_replication(self, tmp_path):
        data = generate_synthetic(3, 60, seed=0)
        path = tmp_path / "d.csv"
        header = ",".join(list(data.names) + ["y"])
        rows = "\n".join(
            ",".join(repr(float(v)) for v in list(data.X[i]) + [data.y[i]])
            for i in range(data.n)
        )
        path.write_text(header + "\n" + rows + "\n")
        spec = parse_dataset_spec(f"csv:{path}:target=y")
        table = run_benchmark(_tiny_plan(datasets=(spec,), timing=False))
        row = table.rows[0]
        # same data, different fold seeds: replications differ but not wildly
        assert row.mses[0] != row.mses[1]


class TestParsePlan:
    def test_full_plan(self):
        text = """
        # a comment
        datasets = case:2:n=500, case:12:n=500
        methods = gbart, bart
        folds = 5
        replications = 3
        master_seed = 11
        workers = 2
        timing = off
        mcmc.ndpost = 200
        mcmc.burn_in = 50
        search.stage1_trees = 60
        search.stage2_trees = 120
        """
        plan = parse_plan(text)
        assert [d.spec_id for d in plan.datasets] == ["case:2:n=500", "case:12:n=500"]
        assert plan.methods == ("GBART", "BART")
        assert plan.folds == 5 and plan.replications == 3
        assert plan.master_seed == 11 and plan.workers == 2
        assert plan.timing is False
        assert plan.mcmc.ndpost == 200 and plan.mcmc.burn_in == 50
        assert plan.search.stage1_trees == 60 and plan.search.stage2_trees == 120

    def test_desk_scale_defaults(self):
        plan = parse_plan("datasets = case:2")
        assert plan.replications == 5
        assert plan.folds == 5
        assert plan.mcmc.ndpost == 300 and plan.mcmc.burn_in == 100
        assert plan.methods == ("GBART", "BART")

    def test_unknown_key_rejected(self):
        with pytest.raises(InvalidInputError, match="unknown key"):
            parse_plan("datasets = case:2\nfrobnicate = 3")
        with pytest.raises(InvalidInputError, match="unknown mcmc key"):
            parse_plan("datasets = case:2\nmcmc.banana = 3")

    def test_missing_datasets_rejected(self):
        with pytest.raises(InvalidInputError):
            parse_plan("folds = 5")
