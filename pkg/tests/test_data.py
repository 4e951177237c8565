"""Tests for synthetic generators, CSV ingestion, and seeded splits."""

import math

import numpy as np
import pytest

from gbart import (
    CsvParseError,
    CsvSchemaError,
    Dataset,
    InsufficientDataError,
    InvalidCaseError,
    InvalidFoldError,
    case_dimension,
    generate_synthetic,
    kfold_split,
    load_csv,
    synthetic_signal,
    train_val_split,
)


class TestSyntheticSignal:
    def test_case2_at_pinned_point(self):
        # 1*2 + 3*4 + 5*6
        x = np.array([[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]])
        assert synthetic_signal(2, x)[0] == 44.0

    def test_case12_at_pinned_point(self):
        x = np.array([[0.5, 0.5, 0.5, 0.5, 0.5, 0.1, 0.9]])
        expected = 10.0 * math.sin(math.pi * 0.25) + 0.0 + 5.0 + 2.5
        assert synthetic_signal(12, x)[0] == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(14.571067811865476, abs=1e-12)

    def test_case1_vanishes_at_origin(self):
        x = np.zeros((1, 6))
        assert synthetic_signal(1, x)[0] == 0.0

    def test_case3_ignores_x6(self):
        x = np.array([[1.0, 2.0, 3.0, 4.0, 5.0, 100.0]])
        assert synthetic_signal(3, x)[0] == 1.0 * 2.0 + 3.0 + 4.0 + 5.0

    @pytest.mark.parametrize("case,p", [(1, 6), (5, 6), (6, 20), (11, 20), (12, 7)])
    def test_dimensions(self, case, p):
        assert case_dimension(case) == p
        assert generate_synthetic(case, 10, seed=0).p == p

    def test_unknown_case_rejected(self):
        with pytest.raises(InvalidCaseError):
            generate_synthetic(13, 10, seed=0)
        with pytest.raises(InvalidCaseError):
            synthetic_signal(0, np.zeros((1, 6)))


class TestGenerateSynthetic:
    def test_determinism(self):
        a = generate_synthetic(2, 50, seed=42)
        b = generate_synthetic(2, 50, seed=42)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)
        c = generate_synthetic(2, 50, seed=43)
        assert not np.array_equal(a.y, c.y)

    def test_noise_suppression_gives_the_signal(self):
        d = generate_synthetic(2, 50, seed=1, include_noise=False)
        np.testing.assert_allclose(d.y, synthetic_signal(2, d.X), rtol=0, atol=0)

    def test_case2_mean_matches_expectation(self):
        # E[x1 x2 + x3 x4 + x5 x6] = 3 for independent Normal(1,1) coordinates
        d = generate_synthetic(2, 100_000, seed=11)
        assert abs(d.y.mean() - 3.0) < 0.1

    @pytest.mark.parametrize("case,sd", [(1, 0.5), (7, 0.5), (12, 1.0)])
    def test_noise_magnitude(self, case, sd):
        d = generate_synthetic(case, 100_000, seed=5)
        resid = d.y - synthetic_signal(case, d.X)
        assert abs(resid.std() / sd - 1.0) < 0.03

    def test_uniform_tail_coordinates_live_in_unit_interval(self):
        d = generate_synthetic(7, 1000, seed=2)
        assert d.X[:, 6:].min() >= 0.0 and d.X[:, 6:].max() <= 1.0
        # the first six are spread well beyond [0, 1]
        assert d.X[:, :6].std() > 0.8


class TestLoadCsv:
    def _write(self, path, text):
        path.write_text(text)
        return str(path)

    def test_target_by_name(self, tmp_path):
        f = self._write(tmp_path / "d.csv", "a,b,c\n1,2,3\n4,5,6\n")
        d = load_csv(f, "c")
        assert d.p == 2 and d.n == 2
        assert d.names == ("a", "b")
        np.testing.assert_array_equal(d.y, [3.0, 6.0])

    def test_target_by_index_and_drop(self, tmp_path):
        f = self._write(tmp_path / "d.csv", "a,b,c,d\n1,2,3,4\n")
        d = load_csv(f, 2, drop_columns=["a"])
        assert d.names == ("b", "d")
        assert d.y[0] == 3.0

    def test_parse_error_names_the_cell(self, tmp_path):
        f = self._write(tmp_path / "d.csv", "a,b\n1,2\n1,oops\n")
        with pytest.raises(CsvParseError, match=r"row 3.*'b'.*'oops'"):
            load_csv(f, "a")

    def test_non_finite_cell_rejected(self, tmp_path):
        f = self._write(tmp_path / "d.csv", "a,b\n1,nan\n")
        with pytest.raises(CsvParseError, match="non-finite"):
            load_csv(f, "a")

    def test_missing_target_is_schema_error(self, tmp_path):
        f = self._write(tmp_path / "d.csv", "a,b\n1,2\n")
        with pytest.raises(CsvSchemaError, match="'z' not found"):
            load_csv(f, "z")

    def test_slump_shaped_file(self, tmp_path):
        """A file with the layout of the concrete slump dataset: an index
        column, seven inputs, three outputs; 103 rows."""
        rng = np.random.default_rng(0)
        header = "No,Cement,Slag,Fly ash,Water,SP,Coarse Aggr.,Fine Aggr.,SLUMP(cm),FLOW(cm),Compressive Strength (28-day)(Mpa)"
        lines = [header]
        for i in range(103):
            vals = rng.uniform(1, 100, size=10)
            lines.append(",".join([str(i + 1)] + [f"{v:.2f}" for v in vals]))
        f = self._write(tmp_path / "slump.csv", "\n".join(lines) + "\n")
        d = load_csv(
            f,
            "SLUMP(cm)",
            drop_columns=["No", "FLOW(cm)", "Compressive Strength (28-day)(Mpa)"],
        )
        assert d.n == 103 and d.p == 7


class TestKfoldSplit:
    def test_even_split(self):
        spec = kfold_split(10, 5, seed=0)
        sizes = [len(spec.test_rows(f)) for f in range(5)]
        assert sizes == [2, 2, 2, 2, 2]
        all_rows = np.concatenate([spec.test_rows(f) for f in range(5)])
        assert sorted(all_rows) == list(range(10))

    def test_uneven_split_sizes(self):
        # ceiling/floor arithmetic: 103 = 3*21 + 2*20
        spec = kfold_split(103, 5, seed=1)
        sizes = sorted((len(spec.test_rows(f)) for f in range(5)), reverse=True)
        assert sizes == [21, 21, 21, 20, 20]

    def test_determinism(self):
        a = kfold_split(50, 5, seed=9)
        b = kfold_split(50, 5, seed=9)
        np.testing.assert_array_equal(a.assignments, b.assignments)

    def test_out_of_range_k(self):
        with pytest.raises(InvalidFoldError):
            kfold_split(10, 1, seed=0)
        with pytest.raises(InvalidFoldError):
            kfold_split(10, 11, seed=0)


class TestTrainValSplit:
    def test_sizes(self):
        d = generate_synthetic(2, 10, seed=0)
        train, val = train_val_split(d, 0.2, seed=0)
        assert (train.n, val.n) == (8, 2)

    def test_union_is_the_original_multiset(self):
        d = generate_synthetic(2, 37, seed=3)
        train, val = train_val_split(d, 0.25, seed=5)
        combined = np.sort(np.concatenate([train.y, val.y]))
        np.testing.assert_array_equal(combined, np.sort(d.y))

    def test_determinism(self):
        d = generate_synthetic(2, 30, seed=0)
        a = train_val_split(d, 0.2, seed=7)
        b = train_val_split(d, 0.2, seed=7)
        np.testing.assert_array_equal(a[0].X, b[0].X)
        np.testing.assert_array_equal(a[1].y, b[1].y)

    def test_degenerate_split_rejected(self):
        d = generate_synthetic(2, 3, seed=0)
        with pytest.raises(InsufficientDataError):
            train_val_split(d, 0.9, seed=0)


class TestDataset:
    def test_shape_validation(self):
        with pytest.raises(Exception):
            Dataset(np.zeros((3, 2)), np.zeros(4))

    def test_non_finite_rejected(self):
        X = np.zeros((2, 2))
        X[0, 0] = np.inf
        with pytest.raises(Exception):
            Dataset(X, np.zeros(2))

    def test_subset_preserves_names(self):
        d = generate_synthetic(2, 10, seed=0)
        s = d.subset(np.array([1, 3, 5]))
        assert s.n == 3 and s.names == d.names
