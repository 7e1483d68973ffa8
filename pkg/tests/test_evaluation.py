import warnings

import numpy as np
import pytest

from hrpembed.errors import InvalidArgumentError, ShapeError, TrainingDivergedError, UndefinedCorrelationError
from hrpembed.evaluation import (
    AMSGrad,
    Dataset,
    LinearModel,
    RMSProp,
    TrainConfig,
    binary_features,
    cross_validate,
    gradient_of_loss,
    holdout_evaluate,
    loss,
    predict,
    softmax,
    sts_eval,
    train,
)
from hrpembed.projection import CompressionConfig
from hrpembed.synthetic import gaussian_blobs, sts_pairs


def blobs_2d(rng, n=200, margin=4.0):
    """Two unit-variance blobs whose means sit ``margin`` sigma from the boundary."""
    y = np.arange(n) % 2
    X = rng.standard_normal((n, 2))
    X[:, 0] += np.where(y == 1, margin, -margin)
    return Dataset(X, y)


def numeric_gradient(model, batch, l2, h=1e-5):
    gW = np.zeros_like(model.weights)
    gb = np.zeros_like(model.bias)
    for arr, out in ((model.weights, gW), (model.bias, gb)):
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = loss(model, batch, l2)
            arr[idx] = old - h
            down = loss(model, batch, l2)
            arr[idx] = old
            out[idx] = (up - down) / (2 * h)
    return gW, gb


def rel_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


class TestGradient:
    def test_matches_finite_differences(self, rng):
        for _ in range(10):
            model = LinearModel(rng.standard_normal((5, 3)), rng.standard_normal(3))
            batch = (rng.standard_normal((7, 5)), rng.integers(0, 3, 7))
            l2 = float(rng.uniform(0, 0.5))
            gW, gb = gradient_of_loss(model, batch, l2)
            nW, nb = numeric_gradient(model, batch, l2)
            assert rel_error(np.r_[gW.ravel(), gb], np.r_[nW.ravel(), nb]) < 1e-4

    def test_bias_gradient_zero_at_onehot_fit(self):
        # huge logit margins make softmax exactly one-hot in float64
        X = np.eye(3)
        model = LinearModel(1e3 * np.eye(3), np.zeros(3))
        _, gb = gradient_of_loss(model, (X, np.arange(3)))
        assert np.abs(gb).sum() == 0.0

    def test_l2_component_is_linear(self, rng):
        model = LinearModel(rng.standard_normal((4, 2)), rng.standard_normal(2))
        batch = (rng.standard_normal((6, 4)), rng.integers(0, 2, 6))
        base, _ = gradient_of_loss(model, batch, 0.0)
        one, _ = gradient_of_loss(model, batch, 0.3)
        two, _ = gradient_of_loss(model, batch, 0.6)
        np.testing.assert_allclose(two - base, 2 * (one - base), rtol=1e-12)

    def test_empty_batch(self):
        with pytest.raises(InvalidArgumentError):
            gradient_of_loss(LinearModel.zeros(2, 2), (np.empty((0, 2)), np.empty(0, int)))


class TestOptimizers:
    @pytest.mark.parametrize("opt_cls", [RMSProp, AMSGrad])
    @pytest.mark.parametrize("lr", [1e-2, 1e-3])
    def test_monotone_on_quadratic(self, rng, opt_cls, lr):
        curv = rng.uniform(0.5, 5.0, 10)
        x = rng.uniform(5, 10, 10) * rng.choice([-1, 1], 10)
        f = lambda z: 0.5 * float(curv @ (z * z))
        opt = opt_cls(lr=lr)
        values = []
        for _ in range(100):
            opt.step([x], [curv * x])
            values.append(f(x))
        assert all(b <= a for a, b in zip(values[10:], values[11:]))

    def test_amsgrad_second_moment_max_nondecreasing(self, rng):
        p = rng.standard_normal(8)
        opt = AMSGrad(lr=1e-2)
        prev = np.zeros(8)
        for _ in range(200):
            opt.step([p], [rng.standard_normal(8) * rng.uniform(0, 3)])
            assert np.all(opt.v_max[0] >= prev)
            prev = opt.v_max[0].copy()


class TestTrain:
    def test_blobs_training_accuracy(self, rng):
        data = blobs_2d(rng)
        model = train(data, TrainConfig(epochs=200, learning_rate=1e-2))
        acc = np.mean([predict(model, x) == y for x, y in zip(data.features, data.labels)])
        assert acc >= 0.99
        assert model.losses[-1] <= model.losses[0]

    def test_zero_learning_rate_keeps_init(self, rng):
        data = blobs_2d(rng, n=50)
        model = train(data, TrainConfig(learning_rate=0.0, batch_size=50, epochs=1))
        assert not model.weights.any() and not model.bias.any()

    def test_deterministic(self, rng):
        data = blobs_2d(rng)
        for opt in ("rmsprop", "amsgrad"):
            a = train(data, TrainConfig(optimizer=opt, epochs=5, seed=9))
            b = train(data, TrainConfig(optimizer=opt, epochs=5, seed=9))
            assert np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)

    def test_divergence_reports_epoch(self, rng):
        X = rng.standard_normal((40, 3)) * 1e300
        data = Dataset(X, np.arange(40) % 2)
        with pytest.raises(TrainingDivergedError) as e:
            train(data, TrainConfig(learning_rate=1e300, epochs=3))
        assert e.value.epoch == 0

    def test_early_stopping_uses_tenacity(self, rng):
        # a validation set the model cannot improve on stops after tenacity+1 stale epochs
        data = blobs_2d(rng, n=100)
        Xv = np.zeros((4, 2))
        yv = np.array([0, 1, 0, 1])
        model = train(data, TrainConfig(epochs=50, tenacity=3), validation=(Xv, yv))
        # initial loss + 1 improving epoch + 4 stale epochs
        assert len(model.losses) == 1 + 5


class TestPredict:
    def test_bias_only(self):
        assert predict(LinearModel(np.zeros((3, 2)), np.array([0.0, 1.0])), [1, 2, 3]) == 1

    def test_identity_weights(self):
        assert predict(LinearModel(np.eye(2), np.zeros(2)), [1, 0]) == 0

    def test_tie_lowest_index(self):
        assert predict(LinearModel.zeros(2, 4), [1, 1]) == 0

    def test_agrees_with_softmax(self, rng):
        for _ in range(100):
            model = LinearModel(rng.standard_normal((6, 4)), rng.standard_normal(4))
            x = rng.standard_normal(6)
            probs = softmax(x @ model.weights + model.bias)
            assert predict(model, x) == int(np.argmax(probs))

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            predict(LinearModel.zeros(3, 2), [1, 2])


class TestDataset:
    def test_missing_class(self):
        with pytest.raises(InvalidArgumentError):
            Dataset(np.zeros((3, 2)), [0, 2, 0])

    def test_single_class(self):
        with pytest.raises(InvalidArgumentError):
            Dataset(np.zeros((3, 2)), [0, 0, 0])


class TestCrossValidate:
    def test_separable(self, rng):
        res = cross_validate(blobs_2d(rng, n=500), TrainConfig.senteval(learning_rate=1e-2))
        assert len(res.fold_accuracies) == 5
        assert res.mean >= 0.95

    def test_shuffled_labels_chance(self, rng):
        X = rng.standard_normal((2000, 5))
        y = rng.permutation(np.arange(2000) % 2)
        res = cross_validate(Dataset(X, y), TrainConfig.senteval())
        assert 0.45 <= res.mean <= 0.55

    def test_leave_one_out(self, rng):
        data = blobs_2d(rng, n=10)
        res = cross_validate(data, TrainConfig.senteval(folds=10))
        assert len(res.fold_accuracies) == 10
        assert set(res.fold_accuracies) <= {0.0, 1.0}

    def test_warns_on_missing_class(self):
        X = np.arange(6, dtype=float)[:, None]
        with pytest.warns(UserWarning, match="absent"):
            cross_validate(Dataset(X, [0, 0, 0, 0, 0, 1]), TrainConfig.senteval(folds=6))

    def test_reproducible(self, rng):
        data = blobs_2d(rng, n=300)
        cfg = TrainConfig.senteval(seed=4)
        assert cross_validate(data, cfg) == cross_validate(data, cfg)

    def test_needs_two_folds(self, rng):
        with pytest.raises(InvalidArgumentError):
            cross_validate(blobs_2d(rng), TrainConfig(folds=1))


def test_protocol_presets():
    s = TrainConfig.senteval()
    assert (s.optimizer, s.batch_size, s.tenacity, s.epochs, s.folds) == ("rmsprop", 128, 3, 2, 5)
    assert s.describe("senteval") == "optimizer=rmsprop batch=128 tenacity=3 epochs=2 folds=5"
    g = TrainConfig.seeg()
    assert (g.optimizer, g.batch_size, g.epochs) == ("amsgrad", 128, 500)
    assert g.describe("seeg") == "optimizer=amsgrad batch=128 epochs=500"


def test_holdout(rng):
    data = blobs_2d(rng, n=400)
    tr = Dataset(data.features[:300], data.labels[:300])
    assert holdout_evaluate(tr, data.features[300:], data.labels[300:], TrainConfig.seeg(epochs=20)) >= 0.95


def test_binary_features_are_zero_one():
    X, _ = gaussian_blobs(32, 20, 2, seed=1)
    F = binary_features(X, CompressionConfig.hrp(32, 64, 2))
    assert F.shape == (20, 64) and set(np.unique(F)) <= {0.0, 1.0}


class TestSts:
    def test_float_rho_is_one_with_true_gold(self):
        A, B, gold = sts_pairs(64, 50, seed=3)
        rho_f, _ = sts_eval(A, B, gold, CompressionConfig.hrp(64, 256, 0))
        assert rho_f == pytest.approx(1.0)

    def test_binary_rho_high(self):
        A, B, gold = sts_pairs(768, 300, seed=4)
        _, rho_b = sts_eval(A, B, gold, CompressionConfig.hrp(768, 1024, 1))
        assert rho_b >= 0.95

    def test_more_bits_not_worse(self):
        A, B, gold = sts_pairs(768, 200, seed=5)
        low = np.mean([sts_eval(A, B, gold, CompressionConfig.hrp(768, 256, s))[1] for s in range(10)])
        high = np.mean([sts_eval(A, B, gold, CompressionConfig.hrp(768, 2048, s))[1] for s in range(10)])
        assert low <= high

    def test_constant_gold(self):
        A, B, _ = sts_pairs(8, 10, seed=6)
        with pytest.raises(UndefinedCorrelationError):
            sts_eval(A, B, np.ones(10), CompressionConfig.hrp(8, 16, 0))

    def test_length_mismatch(self):
        A, B, gold = sts_pairs(8, 10, seed=6)
        with pytest.raises(ShapeError):
            sts_eval(A, B, gold[:-1], CompressionConfig.hrp(8, 16, 0))
