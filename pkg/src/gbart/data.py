"""Datasets: synthetic generators, CSV ingestion, and seeded splitting.

Twelve synthetic regression cases are supported.  Cases 1-11 draw the first
six predictors from independent Normal(1, 1) and (for the 20-dimensional
cases) fill the rest with Uniform[0, 1]; the response adds Normal(0, 0.5^2)
noise.  Case 12 is the classic Friedman benchmark: seven Uniform[0, 1]
predictors (two inert) with Normal(0, 1) noise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CsvParseError,
    CsvSchemaError,
    InsufficientDataError,
    InvalidCaseError,
    InvalidFoldError,
    InvalidInputError,
)


@dataclass(frozen=True)
class Dataset:
    """A predictor matrix with its response vector.

    Attributes:
        X: n x p matrix of finite reals.
        y: length-n response vector.
        names: optional predictor column labels (length p).
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2:
            raise InvalidInputError(f"X must be 2-D, got shape {X.shape}")
        if y.ndim != 1:
            raise InvalidInputError(f"y must be 1-D, got shape {y.shape}")
        if X.shape[0] != y.shape[0]:
            raise InvalidInputError(
                f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
            )
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise InvalidInputError("dataset must have at least one row and one column")
        if not np.isfinite(X).all():
            raise InvalidInputError("X contains non-finite values")
        if not np.isfinite(y).all():
            raise InvalidInputError("y contains non-finite values")
        if self.names is not None and len(self.names) != X.shape[1]:
            raise InvalidInputError("names length does not match predictor count")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows: np.ndarray) -> "Dataset":
        """A new dataset containing the given rows (in the given order)."""
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.X[rows], self.y[rows], self.names)


@dataclass(frozen=True)
class FoldSpec:
    """Assignment of observations to cross-validation folds.

    Attributes:
        k: fold count.
        assignments: length-n vector with values in {0, ..., k-1}.
    """

    k: int
    assignments: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.assignments, dtype=np.int64)
        object.__setattr__(self, "assignments", a)
        counts = np.bincount(a, minlength=self.k)
        if counts.min() == 0:
            raise InvalidFoldError("every fold must be nonempty")
        if counts.max() - counts.min() > 1:
            raise InvalidFoldError("fold sizes may differ by at most 1")

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def _sum_cols(X: np.ndarray, lo: int, hi: int) -> np.ndarray:
    return X[:, lo:hi].sum(axis=1)


def _case1(X):
    return (X[:, 0] + X[:, 1]) ** 2 + (X[:, 2] + X[:, 3]) ** 2 + (X[:, 4] + X[:, 5]) ** 2


def _case2(X):
    return X[:, 0] * X[:, 1] + X[:, 2] * X[:, 3] + X[:, 4] * X[:, 5]


def _case3(X):
    return X[:, 0] * X[:, 1] + X[:, 2] + X[:, 3] + X[:, 4]


def _case4(X):
    return X[:, 0] * X[:, 1] + X[:, 2] * X[:, 3] + X[:, 4] + X[:, 5]


def _case5(X):
    return (
        np.sin(X[:, 0]) * np.sin(X[:, 1])
        + (X[:, 2] + X[:, 3]) ** 2
        + (X[:, 4] + X[:, 5]) ** 2
    )


def _case6(X):
    return (
        5.0 * (X[:, 0] + X[:, 1]) ** 2
        + (X[:, 2] + X[:, 3]) ** 2
        + 0.2 * (X[:, 4] + X[:, 5]) ** 2
        + 0.04 * (X[:, 6:20] ** 2).sum(axis=1)
    )


def _case7(X):
    return (
        5.0 * X[:, 0] * X[:, 1]
        + X[:, 2] * X[:, 3]
        + 0.2 * X[:, 4] * X[:, 5]
        + 0.04 * _sum_cols(X, 6, 20)
    )


def _case8(X):
    return (
        5.0 * np.sin(X[:, 0]) * np.sin(X[:, 1])
        + (X[:, 2] + X[:, 3]) ** 2
        + 0.2 * (X[:, 4] + X[:, 5]) ** 2
        + 0.04 * _sum_cols(X, 6, 20)
    )


def _case9(X):
    return (
        5.0 * np.sin(X[:, 0]) * np.sin(X[:, 1])
        + X[:, 2] * X[:, 3]
        + 0.2 * X[:, 4] * X[:, 5]
        + 0.04 * _sum_cols(X, 6, 20)
    )


def _case10(X):
    return (
        5.0 * (X[:, 0] + X[:, 1]) ** 2
        + (X[:, 2] + X[:, 3]) ** 2
        + 0.2 * (X[:, 4] + X[:, 5]) ** 2
    )


def _case11(X):
    return 5.0 * X[:, 0] * X[:, 1] + X[:, 2] * X[:, 3] + 0.2 * X[:, 4] * X[:, 5]


def _case12(X):
    return (
        10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
        + 20.0 * (X[:, 2] - 0.5) ** 2
        + 10.0 * X[:, 3]
        + 5.0 * X[:, 4]
    )


# case -> (p, signal, noise standard deviation)
_CASES = {
    1: (6, _case1, 0.5),
    2: (6, _case2, 0.5),
    3: (6, _case3, 0.5),
    4: (6, _case4, 0.5),
    5: (6, _case5, 0.5),
    6: (20, _case6, 0.5),
    7: (20, _case7, 0.5),
    8: (20, _case8, 0.5),
    9: (20, _case9, 0.5),
    10: (20, _case10, 0.5),
    11: (20, _case11, 0.5),
    12: (7, _case12, 1.0),
}


def case_dimension(case: int) -> int:
    """Predictor count p for a synthetic case."""
    if case not in _CASES:
        raise InvalidCaseError(f"case must be in 1..12, got {case}")
    return _CASES[case][0]


def synthetic_signal(case: int, X: np.ndarray) -> np.ndarray:
    """Noise-free response of a synthetic case evaluated at the rows of X.

    Intended for golden tests and oracle checks; generated data always
    includes noise unless explicitly suppressed.
    """
    if case not in _CASES:
        raise InvalidCaseError(f"case must be in 1..12, got {case}")
    p, signal, _ = _CASES[case]
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] < p:
        raise InvalidInputError(f"case {case} needs {p} predictors, got {X.shape[1]}")
    return signal(X)


def generate_synthetic(
    case: int, n: int, seed: int, include_noise: bool = True
) -> Dataset:
    """Draw a synthetic dataset for one of the twelve generating models.

    Arguments:
        case: generating model number, 1-12.
        n: number of observations.
        seed: RNG seed; identical (case, n, seed) gives an identical dataset.
        include_noise: when False, return the noise-free signal (tests only).

    Returns:
        A Dataset with p predictors named x1..xp.
    """
    if case not in _CASES:
        raise InvalidCaseError(f"case must be in 1..12, got {case}")
    if n < 1:
        raise InvalidInputError(f"n must be positive, got {n}")
    p, signal, noise_sd = _CASES[case]
    rng = np.random.default_rng(seed)
    if case == 12:
        X = rng.uniform(0.0, 1.0, size=(n, p))
    else:
        X = np.empty((n, p))
        X[:, :6] = rng.normal(loc=1.0, scale=1.0, size=(n, 6))
        if p > 6:
            X[:, 6:] = rng.uniform(0.0, 1.0, size=(n, p - 6))
    y = signal(X)
    if include_noise:
        y = y + rng.normal(0.0, noise_sd, size=n)
    names = tuple(f"x{j + 1}" for j in range(p))
    return Dataset(X, y, names)


def _resolve_column(header: list[str], column: str | int, role: str) -> int:
    if isinstance(column, int):
        if not 0 <= column < len(header):
            raise CsvSchemaError(f"{role} column index {column} out of range")
        return column
    try:
        return header.index(column)
    except ValueError:
        raise CsvSchemaError(f"{role} column {column!r} not found in header") from None


def load_csv(
    path: str,
    target_column: str | int,
    drop_columns: list[str | int] | None = None,
) -> Dataset:
    """Load a numeric CSV file with a header row into a Dataset.

    Predictors are all columns except the target and any dropped columns,
    kept in file order.  Every retained cell must parse as a finite real.

    Arguments:
        path: CSV file path.
        target_column: response column, by header name or zero-based index.
        drop_columns: columns to exclude from the predictors (names or indices).

    Raises:
        CsvSchemaError: missing target/drop column or no predictors left.
        CsvParseError: a retained cell is not a finite real (names the cell).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvSchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        target_idx = _resolve_column(header, target_column, "target")
        drop_idx = {
            _resolve_column(header, c, "drop") for c in (drop_columns or [])
        }
        if target_idx in drop_idx:
            raise CsvSchemaError("target column cannot also be dropped")
        pred_idx = [
            j for j in range(len(header)) if j != target_idx and j not in drop_idx
        ]
        if not pred_idx:
            raise CsvSchemaError("no predictor columns remain after dropping")

        keep = pred_idx + [target_idx]
        rows: list[list[float]] = []
        for i, record in enumerate(reader):
            if not record:
                continue
            parsed = []
            for j in keep:
                if j >= len(record):
                    raise CsvParseError(
                        f"{path}: row {i + 2} has no column {header[j]!r}"
                    )
                cell = record[j].strip()
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvParseError(
                        f"{path}: row {i + 2}, column {header[j]!r}: "
                        f"cannot parse {cell!r} as a real number"
                    ) from None
                if not math.isfinite(value):
                    raise CsvParseError(
                        f"{path}: row {i + 2}, column {header[j]!r}: "
                        f"non-finite value {cell!r}"
                    )
                parsed.append(value)
            rows.append(parsed)

    if not rows:
        raise CsvSchemaError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=np.float64)
    names = tuple(header[j] for j in pred_idx)
    return Dataset(arr[:, :-1], arr[:, -1], names)


def kfold_split(n: int, k: int, seed: int) -> FoldSpec:
    """Deal a seeded random permutation of 0..n-1 round-robin into k folds."""
    if not 2 <= k <= n:
        raise InvalidFoldError(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignments = np.empty(n, dtype=np.int64)
    assignments[perm] = np.arange(n) % k
    return FoldSpec(k, assignments)


def train_val_split(
    data: Dataset, val_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Seeded random split into training and validation parts.

    The last ceil(n * val_fraction) rows of a seeded permutation become the
    validation part.
    """
    if not 0.0 < val_fraction < 1.0:
        raise InvalidInputError(f"val_fraction must be in (0, 1), got {val_fraction}")
    n = data.n
    n_val = math.ceil(n * val_fraction)
    if n_val >= n or n_val < 1:
        raise InsufficientDataError(
            f"split of {n} rows at fraction {val_fraction} leaves an empty part"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return data.subset(perm[: n - n_val]), data.subset(perm[n - n_val :])
