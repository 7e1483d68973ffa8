import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hrpembed.binvec import hamming
from hrpembed.errors import InvalidArgumentError, ShapeError
from hrpembed.projection import (
    CompressionConfig,
    Method,
    ProjectionMatrix,
    batch_quantize,
    heaviside,
    hrp_quantize,
    init_projection,
    project,
    sigmoid_quantize,
)
from hrpembed.synthetic import unit_pairs_at_angles


def W_of(rows):
    return ProjectionMatrix.from_array(rows)


class TestInitProjection:
    def test_deterministic(self):
        a = init_projection(7, 2, 3)
        b = init_projection(7, 2, 3)
        assert a.entries.dtype == np.float32
        assert a.entries.tobytes() == b.entries.tobytes()
        assert a == b

    def test_seed_changes_entries(self):
        assert init_projection(7, 2, 3) != init_projection(8, 2, 3)

    def test_moments(self):
        W = init_projection(42, 500, 500).entries.astype(np.float64)
        assert abs(W.mean()) < 0.011
        assert 0.9 <= W.var() <= 1.1
        # 5 sigma / sqrt(n) on the mean
        assert abs(W.mean()) < 5 / math.sqrt(W.size)

    def test_row_major_fill(self):
        from hrpembed.rng import standard_normals

        W = init_projection(5, 3, 4).entries
        assert np.array_equal(W.ravel(), standard_normals(5, 12).astype(np.float32))

    @pytest.mark.parametrize("dims", [(0, 3), (3, 0)])
    def test_zero_dimension(self, dims):
        with pytest.raises(InvalidArgumentError):
            init_projection(1, *dims)

    def test_read_only(self):
        W = init_projection(1, 2, 2)
        with pytest.raises(ValueError):
            W.entries[0, 0] = 1.0


def test_heaviside():
    assert heaviside(0.0) == 1
    assert heaviside(-0.0) == 1
    assert heaviside(-0.5) == 0
    assert heaviside(3.2) == 1
    with pytest.raises(InvalidArgumentError):
        heaviside(float("nan"))


class TestProject:
    def test_examples(self):
        np.testing.assert_allclose(project([0.5, 0.2], W_of([[1], [-1]])), [0.3], rtol=1e-7)
        np.testing.assert_array_equal(project([1, 2, 3], W_of([[1, 0], [0, 1], [1, 1]])), [4, 5])
        W = init_projection(3, 4, 6)
        assert not project(np.zeros(4), W).any()

    def test_output_is_float64(self):
        assert project([1.0], W_of([[1.0]])).dtype == np.float64

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            project([1, 2, 3], W_of([[1], [1]]))

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidArgumentError):
            project([np.inf, 0], W_of([[1], [1]]))


class TestHrpQuantize:
    def test_examples(self):
        assert hrp_quantize([0.5, 0.2], W_of([[1], [-1]])).to_bits().tolist() == [1]
        assert hrp_quantize([0.5, 0.2], W_of([[-1], [1]])).to_bits().tolist() == [0]

    def test_zero_projection_maps_to_one(self):
        assert hrp_quantize([1.0, 1.0], W_of([[1], [-1]])).to_bits().tolist() == [1]

    def test_negation_complements(self, rng):
        W = init_projection(11, 16, 64)
        for _ in range(50):
            x = rng.standard_normal(16)
            assert np.all(project(x, W) != 0)
            assert hrp_quantize(-x, W) == ~hrp_quantize(x, W)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**64 - 1), st.floats(1e-3, 1e3))
    def test_scale_invariance(self, seed, c):
        x = np.random.default_rng(seed % 2**32).standard_normal(24)
        W = init_projection(seed, 24, 40)
        assert hrp_quantize(c * x, W) == hrp_quantize(x, W)

    def test_simhash_angle_law(self):
        d_t = 2048
        thetas = np.linspace(0.05, math.pi - 0.05, 200)
        u, v = unit_pairs_at_angles(thetas, 64, seed=3)
        ok = 0
        for i, theta in enumerate(thetas):
            W = init_projection(1000 + i, 64, d_t)
            p = theta / math.pi
            frac = hamming(hrp_quantize(u[i], W), hrp_quantize(v[i], W)) / d_t
            ok += abs(frac - p) <= 4 * math.sqrt(p * (1 - p) / d_t)
        assert ok >= 198


class TestSigmoid:
    def test_examples(self):
        assert sigmoid_quantize([0.0, -1.0, 2.0]).to_bits().tolist() == [1, 0, 1]
        assert not sigmoid_quantize(-np.arange(1, 10)).to_bits().any()
        assert sigmoid_quantize(np.ones(768)).d_t == 768

    def test_equals_elementwise_heaviside(self, rng):
        x = rng.standard_normal(100)
        x[::7] = 0.0
        assert sigmoid_quantize(x).to_bits().tolist() == [heaviside(v) for v in x]
        sig = 1 / (1 + np.exp(-x))
        assert sigmoid_quantize(x).to_bits().tolist() == (sig >= 0.5).astype(int).tolist()


class TestConfig:
    def test_sigmoid_keeps_dimension(self):
        with pytest.raises(InvalidArgumentError):
            CompressionConfig(Method.SIGMOID, 768, 256)
        assert CompressionConfig.sigmoid(768).d_t == 768

    def test_method_from_string(self):
        assert CompressionConfig("hrp", 4, 8, 1).method is Method.HRP


class TestBatchQuantize:
    def test_empty(self):
        assert batch_quantize([], CompressionConfig.hrp(4, 8, 0)) == []

    def test_batch_equals_singles(self, rng):
        cfg = CompressionConfig.hrp(16, 37, 5)
        xs = rng.standard_normal((3, 16))
        W = init_projection(5, 16, 37)
        assert batch_quantize(xs, cfg) == [hrp_quantize(x, W) for x in xs]

    def test_sigmoid_batch(self, rng):
        xs = rng.standard_normal((4, 10))
        assert batch_quantize(xs, CompressionConfig.sigmoid(10)) == [sigmoid_quantize(x) for x in xs]

    def test_sizes(self, rng):
        out = batch_quantize(rng.standard_normal((1000, 768)), CompressionConfig.hrp(768, 256, 9))
        assert len(out) == 1000
        assert all(len(e.bits) == 32 for e in out)

    def test_mixed_dimensions_name_index(self):
        with pytest.raises(ShapeError, match="embedding 2"):
            batch_quantize([np.ones(4), np.ones(4), np.ones(5)], CompressionConfig.hrp(4, 8, 0))
