import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvsum import tensor as T
from qvsum.errors import DimensionError


def fd_grad(f, x, step=1e-6):
    """Central-difference gradient of scalar f wrt a flat numpy array."""
    g = np.zeros_like(x)
    flat = x.ravel()
    gf = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi = f()
        flat[i] = orig - step
        lo = f()
        flat[i] = orig
        gf[i] = (hi - lo) / (2 * step)
    return g


def rel_err(a, b):
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
    return np.max(np.abs(a - b) / denom)


class TestMatmul:
    def test_identity(self):
        a = T.constant(np.eye(2))
        b = T.constant([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(T.matmul(a, b).array, b.array)

    def test_row_times_column(self):
        out = T.matmul(T.constant([[1.0, 2.0]]), T.constant([[3.0], [4.0]]))
        assert out.array.tolist() == [[11.0]]

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
            T.matmul(T.constant(np.zeros((2, 3))), T.constant(np.zeros((2, 3))))

    def test_grad_of_sum_is_column_sums(self, rng):
        a = T.parameter(rng.normal(size=(3, 4)))
        b = T.parameter(rng.normal(size=(4, 5)))
        T.sum_all(T.matmul(a, b)).backward()
        expected = np.tile(b.array.sum(axis=1), (3, 1))
        assert rel_err(a.grad, expected) <= 1e-12

    def test_grad_matches_finite_differences(self, rng):
        a = T.parameter(rng.normal(size=(3, 4)))
        b = T.parameter(rng.normal(size=(4, 2)))

        def loss():
            return float((a.array @ b.array).sum())

        a.zero_grad()
        T.sum_all(T.matmul(a, b)).backward()
        assert rel_err(a.grad, fd_grad(loss, a.array)) <= 1e-6


class TestSoftmax:
    def test_uniform_logits(self):
        out = T.softmax_rows(T.constant([[0.0, 0.0, 0.0, 0.0]]))
        assert np.allclose(out.array, 0.25, atol=1e-15)

    def test_large_logit_no_overflow(self):
        out = T.softmax_rows(T.constant([[1000.0, 0.0]]))
        assert abs(out.array[0, 0] - 1.0) <= 1e-12
        assert out.array[0, 1] <= 1e-12

    def test_log_ratios(self):
        row = [[math.log(1), math.log(2), math.log(3)]]
        out = T.softmax_rows(T.constant(row))
        assert np.allclose(out.array, [[1 / 6, 2 / 6, 3 / 6]], atol=1e-12)

    @given(st.integers(1, 5), st.integers(2, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_rows_sum_to_one_and_nonnegative(self, m, n, seed):
        x = np.random.default_rng(seed).normal(scale=5.0, size=(m, n))
        out = T.softmax_rows(T.constant(x)).array
        assert np.all(out >= 0)
        assert np.max(np.abs(out.sum(axis=1) - 1.0)) <= 1e-9

    def test_grad_matches_finite_differences(self, rng):
        x = T.parameter(rng.normal(size=(3, 5)))
        w = rng.normal(size=(3, 5))

        def analytic():
            x.zero_grad()
            T.sum_all(T.hadamard(T.softmax_rows(x), T.constant(w))).backward()
            return x.grad

        def numeric():
            def f():
                e = np.exp(x.array - x.array.max(axis=1, keepdims=True))
                return float((w * e / e.sum(axis=1, keepdims=True)).sum())
            return fd_grad(f, x.array)

        assert rel_err(analytic(), numeric()) <= 1e-4


class TestLayerNorm:
    def test_constant_row_maps_to_bias(self):
        x = T.constant([[5.0, 5.0, 5.0, 5.0]])
        out = T.layer_norm(x, T.constant(np.ones(4)), T.constant(np.zeros(4)))
        assert np.allclose(out.array, 0.0, atol=1e-9)

    def test_known_row(self):
        x = T.constant([[1.0, 2.0, 3.0, 4.0]])
        out = T.layer_norm(x, T.constant(np.ones(4)), T.constant(np.zeros(4)))
        expected = [-1.3416, -0.4472, 0.4472, 1.3416]
        assert np.allclose(out.array[0], expected, atol=1e-3)

    def test_pre_affine_rows_normalized(self, rng):
        x = rng.normal(size=(6, 8))
        y = T.normalize_rows(x)
        assert np.max(np.abs(y.mean(axis=1))) <= 1e-9
        assert np.max(np.abs(y.var(axis=1) - 1.0)) <= 1e-4

    def test_grad_matches_finite_differences(self, rng):
        x = T.parameter(rng.normal(size=(3, 8)))
        gain = T.parameter(rng.normal(size=8))
        bias = T.parameter(rng.normal(size=8))
        w = rng.normal(size=(3, 8))

        def f():
            mu = x.array.mean(axis=1, keepdims=True)
            var = x.array.var(axis=1, keepdims=True)
            y = (x.array - mu) / np.sqrt(var + T.LAYER_NORM_EPS)
            return float((w * (y * gain.array + bias.array)).sum())

        for p in (x, gain, bias):
            p.zero_grad()
        T.sum_all(T.hadamard(T.layer_norm(x, gain, bias),
                             T.constant(w))).backward()
        for p in (x, gain, bias):
            assert rel_err(p.grad, fd_grad(f, p.array)) <= 1e-5


class TestElementwise:
    def test_hadamard_identity(self, rng):
        x = T.constant(rng.normal(size=(3, 3)))
        out = T.elementwise("hadamard", x, T.constant(np.ones((3, 3))))
        assert np.array_equal(out.array, x.array)

    def test_sigmoid_at_zero(self):
        assert T.elementwise("sigmoid", T.constant([0.0])).array[0] == 0.5

    def test_gelu_at_zero(self):
        assert T.elementwise("gelu", T.constant([0.0])).array[0] == 0.0

    def test_hadamard_values(self):
        out = T.hadamard(T.constant([1.0, 2.0, 3.0]),
                         T.constant([4.0, 5.0, 6.0]))
        assert out.array.tolist() == [4.0, 10.0, 18.0]

    def test_incompatible_shapes(self):
        with pytest.raises(DimensionError):
            T.hadamard(T.constant(np.zeros((2, 2))), T.constant(np.zeros(3)))

    def test_unknown_op(self):
        with pytest.raises(ValueError):
            T.elementwise("nope", T.constant([1.0]))

    @pytest.mark.parametrize("op", ["sigmoid", "gelu"])
    def test_unary_grads_match_finite_differences(self, op, rng):
        x = T.parameter(rng.normal(size=(4, 4)))
        w = rng.normal(size=(4, 4))

        x.zero_grad()
        T.sum_all(T.hadamard(T.elementwise(op, x), T.constant(w))).backward()

        def f():
            y = T.elementwise(op, T.constant(x.array)).array
            return float((w * y).sum())

        assert rel_err(x.grad, fd_grad(f, x.array)) <= 1e-4


class TestStructuralOps:
    def test_broadcast_rows_grad_sums(self, rng):
        v = T.parameter(rng.normal(size=5))
        w = rng.normal(size=(7, 5))
        T.sum_all(T.hadamard(T.broadcast_rows(v, 7), T.constant(w))).backward()
        assert rel_err(v.grad, w.sum(axis=0)) <= 1e-12

    def test_take_row_grad_is_one_hot(self, rng):
        x = T.parameter(rng.normal(size=(4, 3)))
        T.sum_all(T.take_row(x, 2)).backward()
        expected = np.zeros((4, 3))
        expected[2] = 1.0
        assert np.array_equal(x.grad, expected)

    def test_embed_rows_gathers_columns(self, rng):
        table = T.parameter(rng.normal(size=(4, 6)))
        out = T.embed_rows(table, [1, 5, 1])
        assert np.array_equal(out.array, table.array[:, [1, 5, 1]].T)
        T.sum_all(out).backward()
        assert table.grad[:, 1].tolist() == [2.0] * 4
        assert table.grad[:, 5].tolist() == [1.0] * 4
        assert table.grad[:, 0].tolist() == [0.0] * 4

    def test_cross_entropy_mean_grad(self, rng):
        x = T.parameter(rng.normal(size=(5, 4)))
        labels = [0, 3, 1, 2, 2]

        x.zero_grad()
        T.cross_entropy_mean(x, labels).backward()

        def f():
            m = x.array.max(axis=1, keepdims=True)
            lse = m[:, 0] + np.log(np.exp(x.array - m).sum(axis=1))
            return float((lse - x.array[np.arange(5), labels]).mean())

        assert rel_err(x.grad, fd_grad(f, x.array)) <= 1e-4


def test_forward_is_deterministic(rng):
    x = rng.normal(size=(5, 5))
    a = T.softmax_rows(T.constant(x)).array
    b = T.softmax_rows(T.constant(x)).array
    assert np.array_equal(a, b)


def test_tensor_invariants(rng):
    t = T.Tensor(rng.normal(size=(3, 4)))
    assert int(np.prod(t.shape)) == t.data.size
    assert np.all(np.isfinite(t.data))
