"""Threshold decision stumps and their weighted search.

A stump tests one feature against one threshold; values with
``x[feature] <= threshold`` go left (ties included), the rest go right, and
each side carries one real-valued output. Binary stumps restrict the outputs
to {-1, +1} and are searched by minimum weighted error. Confidence-rated
stumps get each side's output from the smoothed log-odds of the weighted
label masses, and are searched by the normalizer surrogate
``2*sqrt((W+ + s)(W- + s))`` summed over both sides.

Candidate thresholds for a feature are the midpoints between consecutive
distinct sorted values, plus one threshold below the minimum (empty left
side). Ties between candidates are broken deterministically: lowest feature
index, then lowest threshold, then the orientation with
left_output <= right_output. Any parallel or reordered scan must reduce with
the same rule so results match the sequential one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, check_distribution
from .errors import DataError


@dataclass(frozen=True)
class Stump:
    """One-level decision rule with real-valued outputs."""

    feature_index: int
    threshold: float
    left_output: float
    right_output: float

    def __post_init__(self):
        if not (math.isfinite(self.left_output) and math.isfinite(self.right_output)):
            raise DataError("stump outputs must be finite")
        if not math.isfinite(self.threshold):
            raise DataError("stump threshold must be finite")

    @property
    def is_binary(self) -> bool:
        return abs(self.left_output) == 1.0 and abs(self.right_output) == 1.0

    def evaluate(self, x) -> float:
        """Output for a single feature vector."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DataError("evaluate expects a single feature vector")
        if not 0 <= self.feature_index < x.shape[0]:
            raise DataError(
                f"feature index {self.feature_index} out of range for {x.shape[0]} features"
            )
        v = float(x[self.feature_index])
        return self.left_output if v <= self.threshold else self.right_output

    def evaluate_matrix(self, X: np.ndarray) -> np.ndarray:
        """Outputs for every row of an (n, d) matrix."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or not 0 <= self.feature_index < X.shape[1]:
            raise DataError(
                f"feature index {self.feature_index} out of range for {X.shape[1]} features"
            )
        return np.where(
            X[:, self.feature_index] <= self.threshold,
            self.left_output,
            self.right_output,
        )


@dataclass(frozen=True)
class StumpSearchConfig:
    """How the base learner searches: binary or confidence-rated outputs.

    smoothing=None means the default 1/(2m), which caps the magnitude of
    confidence-rated outputs on pure sides.
    """

    mode: str = "binary"
    smoothing: float | None = None

    def __post_init__(self):
        if self.mode not in ("binary", "confidence"):
            raise DataError(f"unknown stump mode {self.mode!r}")
        if self.smoothing is not None and not self.smoothing >= 0.0:
            raise DataError("smoothing must be nonnegative")

    def resolve_smoothing(self, m: int) -> float:
        return 1.0 / (2.0 * m) if self.smoothing is None else float(self.smoothing)


class StumpSearchSpace:
    """Per-feature sorted views shared across boosting rounds.

    For feature j, ``orders[j]`` sorts rows by value; ``left_counts[j][c]``
    is how many sorted rows fall left of candidate threshold
    ``thresholds[j][c]``. Candidate 0 is the below-minimum threshold.
    """

    def __init__(self, X: np.ndarray):
        X = np.asarray(X, dtype=np.float64)
        self.m, self.d = X.shape
        self.orders: list[np.ndarray] = []
        self.thresholds: list[np.ndarray] = []
        self.left_counts: list[np.ndarray] = []
        for j in range(self.d):
            order = np.argsort(X[:, j], kind="stable")
            v = X[order, j]
            bpos = np.nonzero(v[:-1] < v[1:])[0]
            thr = np.concatenate(([v[0] - 1.0], (v[bpos] + v[bpos + 1]) / 2.0))
            counts = np.concatenate(([0], bpos + 1))
            self.orders.append(order)
            self.thresholds.append(thr)
            self.left_counts.append(counts)


def _side_masses(space: StumpSearchSpace, j: int, D: np.ndarray, y: np.ndarray):
    """Weighted positive/negative label mass left of each candidate."""
    order = space.orders[j]
    d_sorted = D[order]
    pos_sorted = np.where(y[order] > 0.0, d_sorted, 0.0)
    neg_sorted = d_sorted - pos_sorted
    cum_pos = np.concatenate(([0.0], np.cumsum(pos_sorted)))
    cum_neg = np.concatenate(([0.0], np.cumsum(neg_sorted)))
    counts = space.left_counts[j]
    wp_left = cum_pos[counts]
    wn_left = cum_neg[counts]
    tot_pos = cum_pos[-1]
    tot_neg = cum_neg[-1]
    # cumsum round-off can leave tiny negatives after subtraction
    wp_right = np.maximum(tot_pos - wp_left, 0.0)
    wn_right = np.maximum(tot_neg - wn_left, 0.0)
    return wp_left, wn_left, wp_right, wn_right


def _require_classification(ds: Dataset) -> None:
    if not ds.is_classification:
        raise DataError("stump search requires classification labels (-1/+1)")


def best_binary_stump(ds: Dataset, D: np.ndarray) -> tuple[Stump, float]:
    """Minimum weighted-error stump with outputs in {-1, +1}.

    Scans every feature, every candidate threshold, and both orientations;
    the orientation flip guarantees the returned error is <= 1/2.
    """
    _require_classification(ds)
    D = np.asarray(D, dtype=np.float64)
    check_distribution(D)
    space = StumpSearchSpace(ds.features)
    return _best_binary(space, D, ds.labels)


def _best_binary(space: StumpSearchSpace, D: np.ndarray, y: np.ndarray) -> tuple[Stump, float]:
    best: Stump | None = None
    best_err = math.inf
    for j in range(space.d):
        wp_left, wn_left, wp_right, wn_right = _side_masses(space, j, D, y)
        # orientation a: left -1 / right +1 misclassifies left positives
        # and right negatives; orientation b is the flip.
        err_a = wp_left + wn_right
        err_b = wn_left + wp_right
        use_a = err_a <= err_b
        errs = np.where(use_a, err_a, err_b)
        c = int(np.argmin(errs))
        if errs[c] < best_err:
            best_err = float(errs[c])
            if use_a[c]:
                left, right = -1.0, 1.0
            else:
                left, right = 1.0, -1.0
            best = Stump(j, float(space.thresholds[j][c]), left, right)
    assert best is not None
    return best, max(best_err, 0.0)


def confidence_output(w_pos: float, w_neg: float, smoothing: float) -> float:
    """Smoothed log-odds output for one side: 0.5*ln((W+ + s)/(W- + s)).

    Equal masses give 0 even at smoothing 0 (the symmetric limit); a pure
    side with smoothing 0 has no finite log-odds and is an error.
    """
    num = w_pos + smoothing
    den = w_neg + smoothing
    if num == den:
        return 0.0
    if den == 0.0 or num == 0.0:
        raise DataError(
            "pure side with smoothing=0 would give an infinite output; "
            "use positive smoothing"
        )
    return 0.5 * math.log(num / den)


def best_confidence_stump(
    ds: Dataset, D: np.ndarray, smoothing: float | None = None
) -> Stump:
    """Stump minimizing the two-sided normalizer surrogate.

    Each candidate partition is scored by
    ``sum over sides of 2*sqrt((W+ + s)(W- + s))`` and the winner's outputs
    are the smoothed log-odds of its side masses.
    """
    _require_classification(ds)
    D = np.asarray(D, dtype=np.float64)
    check_distribution(D)
    space = StumpSearchSpace(ds.features)
    s = StumpSearchConfig(mode="confidence", smoothing=smoothing).resolve_smoothing(ds.m)
    return _best_confidence(space, D, ds.labels, s)


def _best_confidence(
    space: StumpSearchSpace, D: np.ndarray, y: np.ndarray, smoothing: float
) -> Stump:
    best: tuple[int, float, float, float, float, float] | None = None
    best_z = math.inf
    for j in range(space.d):
        wp_left, wn_left, wp_right, wn_right = _side_masses(space, j, D, y)
        z = 2.0 * (
            np.sqrt((wp_left + smoothing) * (wn_left + smoothing))
            + np.sqrt((wp_right + smoothing) * (wn_right + smoothing))
        )
        c = int(np.argmin(z))
        if z[c] < best_z:
            best_z = float(z[c])
            best = (
                j,
                float(space.thresholds[j][c]),
                float(wp_left[c]),
                float(wn_left[c]),
                float(wp_right[c]),
                float(wn_right[c]),
            )
    assert best is not None
    j, thr, wp_l, wn_l, wp_r, wn_r = best
    return Stump(
        j,
        thr,
        confidence_output(wp_l, wn_l, smoothing),
        confidence_output(wp_r, wn_r, smoothing),
    )
