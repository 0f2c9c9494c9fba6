"""Boosting that balances training data against a hand-built probability rule.

The objective adds, to the logistic loss of the data, an eta-weighted binary
relative entropy between the rule's probability p(x) and the model's
sigmoid(f(x)). Training reduces this to plain weighted logistic boosting on
an augmented example set: each original example contributes itself with its
base weight plus a (+1, weight eta*p) and a (-1, weight eta*(1-p)) copy.
The weighted logistic loss of the augmented set equals the objective up to
an additive constant (the entropy of p), so the same booster minimizes both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import AdditiveModel, BoostConfig, RoundStats, train
from .data import Dataset
from .errors import DataError, UsageError
from .losses import log1pexp, sigmoid


@dataclass(frozen=True)
class PriorConfig:
    """eta trades data likelihood against distance from the rule.

    There is no sensible default for eta; callers must choose it.
    epsilon_clip keeps the model probability away from 0/1 inside the
    relative entropy so early extreme scores stay finite.
    """

    eta: float
    epsilon_clip: float = 1e-6

    def __post_init__(self):
        if not self.eta >= 0.0:
            raise UsageError("eta must be nonnegative")
        if not 0.0 < self.epsilon_clip < 0.5:
            raise UsageError("epsilon_clip must be in (0, 0.5)")


@dataclass(frozen=True)
class PriorRule:
    """First-match-wins threshold rules mapping an instance to a probability.

    Each rule tests one feature against a threshold with <= or >; instances
    matching no rule get the default probability.
    """

    rules: tuple[tuple[int, str, float, float], ...]
    default: float

    def __post_init__(self):
        for idx, comparator, _, p in self.rules:
            if comparator not in ("<=", ">"):
                raise DataError(f"unknown comparator {comparator!r}")
            if not 0.0 <= p <= 1.0 or idx < 0:
                raise DataError("rule probabilities must be in [0,1] and indices >= 0")
        if not 0.0 <= self.default <= 1.0:
            raise DataError("default probability must be in [0,1]")

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        p = np.full(X.shape[0], self.default)
        unmatched = np.ones(X.shape[0], dtype=bool)
        for idx, comparator, threshold, prob in self.rules:
            if idx >= X.shape[1]:
                raise DataError(f"rule feature index {idx} out of range")
            hit = X[:, idx] <= threshold if comparator == "<=" else X[:, idx] > threshold
            take = unmatched & hit
            p[take] = prob
            unmatched &= ~take
        return p


def load_rule_table(path: str) -> PriorRule:
    """Parse a rule file: `feature_index, <=|>, threshold, probability`
    lines followed by a final `default, probability` line."""
    rules: list[tuple[int, str, float, float]] = []
    default: float | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if default is not None:
                raise DataError(f"{path}: line {line_no}: rules after the default line")
            parts = [p.strip() for p in line.split(",")]
            try:
                if parts[0] == "default":
                    if len(parts) != 2:
                        raise ValueError
                    default = float(parts[1])
                else:
                    if len(parts) != 4:
                        raise ValueError
                    rules.append((int(parts[0]), parts[1], float(parts[2]), float(parts[3])))
            except ValueError:
                raise DataError(f"{path}: line {line_no}: cannot parse {line!r}") from None
    if default is None:
        raise DataError(f"{path}: missing final default line")
    return PriorRule(tuple(rules), default)


def relative_entropy(p, q):
    """Binary relative entropy p*ln(p/q) + (1-p)*ln((1-p)/(1-q)).

    Uses the 0*ln(0) = 0 convention for p in {0, 1}; q must be strictly
    inside (0, 1) (clip before calling).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if np.any((p < 0.0) | (p > 1.0)):
        raise DataError("first argument must be in [0,1]")
    if np.any((q <= 0.0) | (q >= 1.0)):
        raise DataError("second argument must be strictly inside (0,1)")
    with np.errstate(divide="ignore", invalid="ignore"):
        term_pos = np.where(p > 0.0, p * (np.log(p) - np.log(q)), 0.0)
        term_neg = np.where(p < 1.0, (1.0 - p) * (np.log1p(-p) - np.log1p(-q)), 0.0)
    out = term_pos + term_neg
    return out if out.ndim else float(out)


def _resolve_prior(ds: Dataset, prior) -> np.ndarray:
    if prior is None:
        if ds.prior is None:
            raise DataError("no prior available: dataset has no prior column")
        return ds.prior
    if isinstance(prior, PriorRule):
        return prior.evaluate(ds.features)
    p = np.asarray(prior, dtype=np.float64)
    if p.shape != (ds.m,):
        raise DataError("prior must have one probability per example")
    if np.any((p < 0.0) | (p > 1.0)):
        raise DataError("prior out of [0,1]")
    return p


def prior_objective(
    f_values: np.ndarray,
    labels: np.ndarray,
    p: np.ndarray,
    eta: float,
    epsilon_clip: float,
) -> float:
    """Logistic loss of the scores plus eta times RE(p || clipped sigmoid(f))."""
    f = np.asarray(f_values, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    data_term = float(np.sum(log1pexp(-(y * f))))
    q = np.clip(sigmoid(f), epsilon_clip, 1.0 - epsilon_clip)
    return data_term + eta * float(np.sum(relative_entropy(p, q)))


def prior_loss(model: AdditiveModel, ds: Dataset, prior, cfg: PriorConfig) -> float:
    """The combined data-plus-rule objective at the model's scores."""
    if not ds.is_classification:
        raise DataError("prior training requires classification labels")
    p = _resolve_prior(ds, prior)
    return prior_objective(model.score(ds.features), ds.labels, p, cfg.eta, cfg.epsilon_clip)


def augment_with_prior(ds: Dataset, prior, eta: float) -> Dataset:
    """3m-row weighted dataset whose logistic loss matches the objective.

    Rows are the originals (base weight), then +1 copies weighted eta*p,
    then -1 copies weighted eta*(1-p). Zero-weight rows are dropped, so
    eta=0 returns exactly the original examples.
    """
    if not ds.is_classification:
        raise DataError("prior training requires classification labels")
    if eta < 0.0:
        raise UsageError("eta must be nonnegative")
    p = _resolve_prior(ds, prior)
    base = ds.weights if ds.weights is not None else np.ones(ds.m)
    feats = np.vstack((ds.features, ds.features, ds.features))
    labels = np.concatenate((ds.labels, np.ones(ds.m), -np.ones(ds.m)))
    weights = np.concatenate((base, eta * p, eta * (1.0 - p)))
    keep = weights > 0.0
    if not np.any(keep):
        raise DataError("all augmented weights are zero")
    return Dataset(
        features=feats[keep],
        labels=labels[keep],
        weights=weights[keep],
        feature_names=ds.feature_names,
        label_name=ds.label_name,
    )


def train_with_prior(
    ds: Dataset,
    prior,
    prior_cfg: PriorConfig,
    boost_cfg: BoostConfig,
    eval_ds: Dataset | None = None,
) -> tuple[AdditiveModel, list[RoundStats]]:
    """Logistic boosting on the augmented set; stats gain prior_loss.

    With line-search alpha the recorded prior_loss is non-increasing round
    over round, because each round minimizes the augmented weighted logistic
    loss over alpha and the two objectives differ by a constant.
    """
    if boost_cfg.loss_kind != "logistic":
        raise UsageError("prior training requires logistic loss")
    p = _resolve_prior(ds, prior)
    augmented = augment_with_prior(ds, p, prior_cfg.eta)
    model, stats = train(augmented, boost_cfg, eval_ds)
    f = np.zeros(ds.m)
    for (alpha, stump), s in zip(model.terms, stats):
        f += alpha * stump.evaluate_matrix(ds.features)
        s.prior_loss = prior_objective(f, ds.labels, p, prior_cfg.eta, prior_cfg.epsilon_clip)
    return model, stats
