"""Datasets, example-weight vectors, train/test splits, and CSV I/O.

Conventions used throughout the package:

- ``features`` is an (m, d) float64 matrix of finite values; no missing
  values, no imputation.
- ``labels`` is a length-m float64 vector. A dataset is in *classification*
  mode iff every label is exactly -1 or +1; otherwise it is in *regression*
  mode and labels may be any finite reals.
- Weight vectors over examples ("distributions") are plain float64 arrays
  that are nonnegative and sum to 1. :func:`uniform_distribution` and
  :func:`normalized` build them; :func:`check_distribution` validates.

CSV files are UTF-8, comma-separated, with one header row. The label column
is named ``label`` by default; ``prior`` and ``weight`` are reserved column
names for per-example prior probabilities and nonnegative example weights.
All remaining columns are features, in file order.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import RngState

PRIOR_COLUMN = "prior"
WEIGHT_COLUMN = "weight"


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=np.float64).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix plus labels and optional prior/weights.

    Safe to share for concurrent reads; the arrays are marked read-only.
    """

    features: np.ndarray
    labels: np.ndarray
    prior: np.ndarray | None = None
    weights: np.ndarray | None = None
    feature_names: tuple[str, ...] = ()
    label_name: str = "label"

    def __post_init__(self):
        X = _readonly(np.atleast_2d(self.features))
        y = _readonly(self.labels)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError("features must be a nonempty (m, d) matrix")
        if not np.all(np.isfinite(X)):
            raise DataError("features must all be finite")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError("labels must be a length-m vector")
        if not np.all(np.isfinite(y)):
            raise DataError("labels must all be finite")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if self.prior is not None:
            p = _readonly(self.prior)
            if p.shape != y.shape:
                raise DataError("prior must have one entry per example")
            if not np.all((p >= 0.0) & (p <= 1.0)):
                raise DataError("prior out of [0,1]")
            object.__setattr__(self, "prior", p)
        if self.weights is not None:
            w = _readonly(self.weights)
            if w.shape != y.shape:
                raise DataError("weights must have one entry per example")
            if not np.all(np.isfinite(w)) or np.any(w < 0.0):
                raise DataError("weights must be finite and nonnegative")
            if w.sum() <= 0.0:
                raise DataError("weights must not all be zero")
            object.__setattr__(self, "weights", w)
        names = tuple(self.feature_names) or tuple(
            f"f{j}" for j in range(X.shape[1])
        )
        if len(names) != X.shape[1]:
            raise DataError("feature_names length must match feature count")
        object.__setattr__(self, "feature_names", names)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def is_classification(self) -> bool:
        return bool(np.all((self.labels == 1.0) | (self.labels == -1.0)))

    @property
    def mode(self) -> str:
        return "classification" if self.is_classification else "regression"

    def take(self, indices) -> "Dataset":
        """New Dataset containing the given rows, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            prior=None if self.prior is None else self.prior[idx],
            weights=None if self.weights is None else self.weights[idx],
            feature_names=self.feature_names,
            label_name=self.label_name,
        )

    def with_labels(self, labels: np.ndarray) -> "Dataset":
        """Same features/weights, different labels; prior is dropped."""
        return Dataset(
            features=self.features,
            labels=labels,
            weights=self.weights,
            feature_names=self.feature_names,
            label_name=self.label_name,
        )


def uniform_distribution(m: int) -> np.ndarray:
    """Length-m weight vector with all entries 1/m.

    Computed as normalized(ones) so it is bit-identical to the initial
    distribution of an unweighted training run.
    """
    if m < 1:
        raise DataError("need at least one example")
    return normalized(np.ones(m))


def normalized(w: np.ndarray) -> np.ndarray:
    """Scale a nonnegative vector to sum 1."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise DataError("weights must be finite and nonnegative")
    total = w.sum()
    if total <= 0.0:
        raise DataError("weights must not all be zero")
    return w / total

def check_distribution(w: np.ndarray, tol: float = 1e-9) -> None:
    """Raise unless w is nonnegative and sums to 1 within tol."""
    w = np.asarray(w)
    if np.any(w < 0.0):
        raise DataError("distribution has negative entries")
    if abs(float(w.sum()) - 1.0) > tol:
        raise DataError(f"distribution sums to {w.sum()!r}, not 1")


def split(ds: Dataset, test_fraction: float, rng: RngState) -> tuple[Dataset, Dataset]:
    """Deterministic exact partition into (train, test).

    The test set is the first round(m * test_fraction) entries of a seeded
    shuffle; each side keeps the original row order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError("test_fraction must be in (0, 1)")
    n_test = int(math.floor(ds.m * test_fraction + 0.5))
    if ds.m - n_test < 1:
        raise DataError(
            f"test_fraction={test_fraction} leaves no training rows (m={ds.m})"
        )
    perm = rng.permutation(ds.m)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return ds.take(train_idx), ds.take(test_idx)


def _parse_cell(text: str, line_no: int, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(
            f"line {line_no}, column {column!r}: cannot parse {text!r} as a number"
        ) from None
    if not math.isfinite(v):
        raise DataError(f"line {line_no}, column {column!r}: value {text!r} is not finite")
    return v


def load_csv(
    path: str,
    label_column: str = "label",
    prior_column: str | None = None,
) -> Dataset:
    """Load a Dataset from a CSV file, preserving row order.

    Columns other than the label, prior, and reserved ``weight`` column are
    features, in file order. When ``prior_column`` is None, a column named
    ``prior`` is used as the prior if present; passing a name makes it
    required. Mode is inferred: classification iff every label is -1 or +1.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: missing label column {label_column!r}")
        effective_prior = prior_column
        if prior_column is None and PRIOR_COLUMN in header:
            effective_prior = PRIOR_COLUMN
        if effective_prior is not None and effective_prior not in header:
            raise DataError(f"{path}: missing prior column {effective_prior!r}")
        has_weight = WEIGHT_COLUMN in header
        special = {label_column, WEIGHT_COLUMN}
        if effective_prior is not None:
            special.add(effective_prior)
        feature_names = [h for h in header if h not in special]
        if not feature_names:
            raise DataError(f"{path}: no feature columns")
        col_index = {h: i for i, h in enumerate(header)}

        feats: list[list[float]] = []
        labels: list[float] = []
        prior: list[float] = []
        weights: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {line_no}: expected {len(header)} cells, got {len(row)}")
            feats.append([_parse_cell(row[col_index[n]], line_no, n) for n in feature_names])
            labels.append(_parse_cell(row[col_index[label_column]], line_no, label_column))
            if effective_prior is not None:
                p = _parse_cell(row[col_index[effective_prior]], line_no, effective_prior)
                if not 0.0 <= p <= 1.0:
                    raise DataError(f"{path}: line {line_no}: prior out of [0,1]: {p!r}")
                prior.append(p)
            if has_weight:
                weights.append(_parse_cell(row[col_index[WEIGHT_COLUMN]], line_no, WEIGHT_COLUMN))

    if not labels:
        raise DataError(f"{path}: no data rows")
    return Dataset(
        features=np.asarray(feats, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.float64),
        prior=np.asarray(prior) if prior else None,
        weights=np.asarray(weights) if weights else None,
        feature_names=tuple(feature_names),
        label_name=label_column,
    )


def load_features_csv(path: str, label_column: str = "label") -> np.ndarray:
    """Feature matrix from a CSV that may or may not carry a label column.

    Label, prior, and weight columns are dropped when present; everything
    else must parse as finite numbers.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        skip = {label_column, PRIOR_COLUMN, WEIGHT_COLUMN}
        feature_names = [h for h in header if h not in skip]
        if not feature_names:
            raise DataError(f"{path}: no feature columns")
        col_index = {h: i for i, h in enumerate(header)}
        feats = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {line_no}: expected {len(header)} cells, got {len(row)}")
            feats.append([_parse_cell(row[col_index[n]], line_no, n) for n in feature_names])
    if not feats:
        raise DataError(f"{path}: no data rows")
    return np.asarray(feats, dtype=np.float64)


def save_csv(ds: Dataset, path: str) -> None:
    """Write a Dataset as CSV; reloading it yields an identical Dataset.

    Floats use Python's shortest round-trip representation.
    """
    header = list(ds.feature_names) + [ds.label_name]
    if ds.prior is not None:
        header.append(PRIOR_COLUMN)
    if ds.weights is not None:
        header.append(WEIGHT_COLUMN)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(ds.m):
            row = [repr(float(v)) for v in ds.features[i]]
            row.append(repr(float(ds.labels[i])))
            if ds.prior is not None:
                row.append(repr(float(ds.prior[i])))
            if ds.weights is not None:
                row.append(repr(float(ds.weights[i])))
            writer.writerow(row)
    os.replace(tmp, path)


def datasets_equal(a: Dataset, b: Dataset) -> bool:
    """Exact field-by-field equality (used by round-trip checks)."""
    def same(x, y):
        if (x is None) != (y is None):
            return False
        return x is None or (x.shape == y.shape and bool(np.all(x == y)))

    return (
        same(a.features, b.features)
        and same(a.labels, b.labels)
        and same(a.prior, b.prior)
        and same(a.weights, b.weights)
        and a.feature_names == b.feature_names
        and a.label_name == b.label_name
    )
