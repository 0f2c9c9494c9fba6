import numpy as np
import pytest

from boostkit.boosting import AdditiveModel, BoostConfig, train
from boostkit.errors import DataError, UsageError
from boostkit.losses import empirical_loss, log1pexp
from boostkit.prior import (
    PriorConfig,
    PriorRule,
    augment_with_prior,
    load_rule_table,
    prior_loss,
    prior_objective,
    relative_entropy,
    train_with_prior,
)
from boostkit.stumps import Stump, StumpSearchConfig

from conftest import dataset, random_classification

LN2 = 0.6931471805599453
HALF_LN_4_3 = 0.14384103622589042


def logistic_cfg(rounds, stumps="confidence"):
    return BoostConfig(rounds=rounds, loss_kind="logistic",
                       stumps=StumpSearchConfig(mode=stumps))


def weighted_logistic_loss(model, ds):
    w = ds.weights if ds.weights is not None else np.ones(ds.m)
    return float(np.sum(w * log1pexp(-(ds.labels * model.score(ds.features)))))


class TestRelativeEntropy:
    def test_identity_is_zero(self, np_rng):
        for p in np_rng.uniform(0.01, 0.99, size=20):
            assert relative_entropy(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_half_versus_quarter(self):
        assert relative_entropy(0.5, 0.25) == pytest.approx(HALF_LN_4_3, abs=1e-15)

    def test_certain_versus_half(self):
        # the 0*ln(0) convention makes the second term vanish
        assert relative_entropy(1.0, 0.5) == pytest.approx(LN2, abs=1e-15)
        assert relative_entropy(0.0, 0.5) == pytest.approx(LN2, abs=1e-15)

    def test_degenerate_second_argument_rejected(self):
        for bad in (0.0, 1.0):
            with pytest.raises(DataError):
                relative_entropy(0.5, bad)

    def test_nonnegative_zero_only_at_equality(self, np_rng):
        for _ in range(200):
            p = float(np_rng.uniform(0, 1))
            q = float(np_rng.uniform(0.01, 0.99))
            re = relative_entropy(p, q)
            assert re >= 0.0
            if abs(p - q) > 1e-6:
                assert re > 0.0

    def test_vectorized(self):
        out = relative_entropy(np.array([0.5, 1.0]), np.array([0.25, 0.5]))
        np.testing.assert_allclose(out, [HALF_LN_4_3, LN2], atol=1e-15)


class TestPriorLoss:
    def make_ds(self, m=6, prior_value=0.5):
        X = np.arange(m, dtype=float)[:, None]
        y = np.where(np.arange(m) % 2 == 0, 1.0, -1.0)
        return dataset(X, y, prior=np.full(m, prior_value))

    def test_eta_zero_equals_logistic_loss(self, np_rng):
        ds = random_classification(np_rng, 20, 2)
        p = np_rng.uniform(0, 1, size=20)
        model, _ = train(ds, logistic_cfg(4))
        cfg = PriorConfig(eta=0.0)
        assert prior_loss(model, ds, p, cfg) == pytest.approx(
            empirical_loss(model, ds, "logistic1"), rel=1e-12
        )

    def test_zero_score_matching_prior(self):
        ds = self.make_ds(m=6, prior_value=0.5)
        model = AdditiveModel((), "logistic")
        assert prior_loss(model, ds, None, PriorConfig(eta=3.0)) == pytest.approx(
            6 * LN2, abs=1e-12
        )

    def test_zero_score_certain_prior(self):
        ds = self.make_ds(m=4, prior_value=1.0)
        model = AdditiveModel((), "logistic")
        # data term m*ln2 plus eta * m * RE(1 || 0.5)
        assert prior_loss(model, ds, None, PriorConfig(eta=2.0)) == pytest.approx(
            4 * LN2 + 2.0 * 4 * LN2, abs=1e-12
        )

    def test_missing_prior_rejected(self):
        ds = dataset([[1.0]], [1.0])
        with pytest.raises(DataError, match="no prior"):
            prior_loss(AdditiveModel((), "logistic"), ds, None, PriorConfig(eta=1.0))

    def test_eta_monotone_at_zero_score(self):
        ds = self.make_ds(m=5, prior_value=0.9)
        model = AdditiveModel((), "logistic")
        values = [prior_loss(model, ds, None, PriorConfig(eta=e)) for e in (0.0, 0.5, 1.0, 4.0)]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestAugmentation:
    def test_eta_zero_reduces_to_original(self, np_rng):
        ds = random_classification(np_rng, 7, 2)
        p = np_rng.uniform(0, 1, size=7)
        aug = augment_with_prior(ds, p, 0.0)
        assert aug.m == 7
        np.testing.assert_array_equal(aug.features, ds.features)
        np.testing.assert_array_equal(aug.labels, ds.labels)
        np.testing.assert_array_equal(aug.weights, np.ones(7))

    def test_single_example_weights(self):
        ds = dataset([[2.0]], [-1.0])
        aug = augment_with_prior(ds, np.array([0.9]), 1.0)
        assert aug.m == 3
        np.testing.assert_array_equal(aug.labels, [-1.0, 1.0, -1.0])
        np.testing.assert_allclose(aug.weights, [1.0, 0.9, 0.1], atol=1e-15)

    def test_gradient_matches_by_finite_differences(self, np_rng):
        m, eta = 5, 1.7
        y = np_rng.choice([-1.0, 1.0], size=m)
        p = np_rng.uniform(0.05, 0.95, size=m)
        f = np_rng.uniform(-2, 2, size=m)
        clip = 1e-9  # negligible clipping at these scores

        def objective(fv):
            return prior_objective(fv, y, p, eta, clip)

        def augmented(fv):
            # per-example weighted logistic loss of the three row groups
            loss = np.sum(log1pexp(-(y * fv)))
            loss += eta * np.sum(p * log1pexp(-fv))
            loss += eta * np.sum((1.0 - p) * log1pexp(fv))
            return float(loss)

        h = 1e-5
        for i in range(m):
            bump = np.zeros(m)
            bump[i] = h
            g_obj = (objective(f + bump) - objective(f - bump)) / (2 * h)
            g_aug = (augmented(f + bump) - augmented(f - bump)) / (2 * h)
            assert g_obj == pytest.approx(g_aug, abs=1e-6)

    def test_constant_offset_between_objectives(self, np_rng):
        ds = random_classification(np_rng, 12, 2)
        p = np_rng.uniform(0.05, 0.95, size=12)
        eta = 2.5
        aug = augment_with_prior(ds, p, eta)
        cfg = PriorConfig(eta=eta, epsilon_clip=1e-12)
        offsets = []
        for rounds in (1, 3, 6):
            model, _ = train(ds, logistic_cfg(rounds))
            offsets.append(prior_loss(model, ds, p, cfg) - weighted_logistic_loss(model, aug))
        for a, b in zip(offsets, offsets[1:]):
            assert a == pytest.approx(b, abs=1e-9)
        # the offset is minus eta times the entropy of the prior
        entropy = -np.sum(p * np.log(p) + (1 - p) * np.log1p(-p))
        assert offsets[0] == pytest.approx(-eta * float(entropy), abs=1e-9)


class TestTrainWithPrior:
    def test_eta_zero_identical_to_plain_logistic(self, np_rng):
        ds = random_classification(np_rng, 15, 2)
        p = np_rng.uniform(0, 1, size=15)
        cfg = logistic_cfg(6)
        with_prior, _ = train_with_prior(ds, p, PriorConfig(eta=0.0), cfg)
        plain, _ = train(ds, cfg)
        assert with_prior.terms == plain.terms

    def test_prior_loss_recorded_and_non_increasing(self, np_rng):
        ds = random_classification(np_rng, 20, 2)
        p = np_rng.uniform(0.1, 0.9, size=20)
        _, stats = train_with_prior(ds, p, PriorConfig(eta=1.0), logistic_cfg(10))
        values = [s.prior_loss for s in stats]
        assert all(v is not None for v in values)
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-9

    def test_large_eta_matches_prior(self, np_rng):
        # the prior term dominates; sigmoid(f) must track p closely
        m = 80
        X = np_rng.uniform(-1, 1, size=(m, 1))
        y = np_rng.choice([-1.0, 1.0], size=m)
        p = np.where(X[:, 0] > 0.0, 0.9, 0.1)
        ds = dataset(X, y)
        model, _ = train_with_prior(ds, p, PriorConfig(eta=1e4), logistic_cfg(60))
        sig = 1.0 / (1.0 + np.exp(-model.score(ds.features)))
        assert float(np.mean(np.abs(sig - p))) < 0.05

    def test_exponential_loss_rejected(self, np_rng):
        ds = random_classification(np_rng, 10, 1)
        with pytest.raises(UsageError):
            train_with_prior(ds, np.full(10, 0.5), PriorConfig(eta=1.0),
                             BoostConfig(rounds=2, loss_kind="exponential"))

    def test_negative_eta_rejected(self):
        with pytest.raises(UsageError):
            PriorConfig(eta=-1.0)


class TestPriorRules:
    def test_first_match_wins(self):
        rule = PriorRule(((0, "<=", 0.0, 0.9), (0, ">", -5.0, 0.2)), 0.5)
        X = np.array([[-1.0], [1.0], [-10.0]])
        np.testing.assert_allclose(rule.evaluate(X), [0.9, 0.2, 0.9])

    def test_default_applies(self):
        rule = PriorRule(((1, ">", 0.5, 0.8),), 0.3)
        X = np.array([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(rule.evaluate(X), [0.8, 0.3])

    def test_load_rule_table(self, tmp_path):
        path = tmp_path / "rules.txt"
        path.write_text("# prior rules\n0, <=, 0.5, 0.75\n1, >, 2.0, 0.25\ndefault, 0.5\n")
        rule = load_rule_table(str(path))
        assert rule.default == 0.5
        assert rule.rules == ((0, "<=", 0.5, 0.75), (1, ">", 2.0, 0.25))

    def test_missing_default_rejected(self, tmp_path):
        path = tmp_path / "rules.txt"
        path.write_text("0, <=, 0.5, 0.75\n")
        with pytest.raises(DataError, match="default"):
            load_rule_table(str(path))

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "rules.txt"
        path.write_text("0, <=, abc, 0.75\ndefault, 0.5\n")
        with pytest.raises(DataError, match="line 1"):
            load_rule_table(str(path))

    def test_rule_after_default_rejected(self, tmp_path):
        path = tmp_path / "rules.txt"
        path.write_text("default, 0.5\n0, <=, 1.0, 0.2\n")
        with pytest.raises(DataError, match="after the default"):
            load_rule_table(str(path))
