import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from byakta.errors import IdOutOfRange, NonFiniteError, ShapeMismatch
from byakta.neural import (Tensor, add, concat, conv1d, embedding, grad_check, highway, matmul, mul, no_grad,
                           relu, sigmoid, softmax, split, sub, sum_, transposed_conv1d)
from byakta.neural.tensor import bce_with_logits

from oracles import conv1d_loops, matmul_loops, transposed_conv_loops

f64 = np.float64


def T(a, grad=True):
    return Tensor(np.asarray(a, dtype=f64), requires_grad=grad)


def test_sum_gradient_is_ones():
    x = T(np.random.default_rng(0).standard_normal((3, 4)))
    sum_(x).backward()
    assert np.array_equal(x.grad, np.ones((3, 4)))


def test_square_gradient():
    x = T(np.random.default_rng(1).standard_normal(7))
    sum_(mul(x, x)).backward()
    assert np.allclose(x.grad, 2 * x.data)


def test_gradients_accumulate():
    x = T([1.0, 2.0])
    sum_(mul(x, 3.0)).backward()
    sum_(mul(x, 3.0)).backward()
    assert np.array_equal(x.grad, [6.0, 6.0])


def test_shared_subexpression():
    x = T([2.0])
    y = mul(x, x)
    sum_(add(y, y)).backward()
    assert np.allclose(x.grad, [8.0])


def test_broadcast_gradient():
    a, b = T(np.ones((3, 4))), T(np.ones((1, 4)))
    sum_(mul(a, b)).backward()
    assert b.grad.shape == (1, 4) and np.all(b.grad == 3)


def test_deep_graph_does_not_recurse():
    x = T([1.0])
    y = x
    for _ in range(5000):
        y = add(y, 0.0)
    sum_(y).backward()
    assert x.grad[0] == 1.0


def test_no_grad():
    x = T([1.0])
    with no_grad():
        y = mul(x, 2.0)
    assert not y.requires_grad and y._parents == ()


def test_non_finite_is_an_error():
    with pytest.raises(NonFiniteError):
        mul(T([np.inf]), 1.0)
    with pytest.raises(NonFiniteError):
        mul(T([1e308]), 1e10)


def test_sigmoid_and_relu():
    assert sigmoid(T([0.0])).data[0] == 0.5
    s = sigmoid(T([-800.0, 800.0])).data
    assert 0 <= s[0] < 1e-300 and s[1] == 1.0
    assert np.array_equal(relu(T([-1.0, 0.0, 2.0])).data, [0, 0, 2])


def test_softmax():
    assert np.allclose(softmax(T(np.full(5, 3.0))).data, 0.2)
    out = softmax(T([1000.0, 0.0])).data
    assert np.allclose(out, [1.0, 0.0]) and np.isfinite(out).all()
    x = np.random.default_rng(2).standard_normal((4, 6)) * 10
    for axis in (0, 1):
        p = softmax(T(x), axis=axis).data
        assert np.allclose(p.sum(axis=axis), 1.0, atol=1e-6) and (p > 0).all()


def test_masked_softmax():
    mask = np.array([True, False, True])
    p = softmax(T([1.0, 50.0, 1.0]), mask=mask).data
    assert p[1] == 0 and np.allclose(p, [0.5, 0, 0.5])


def test_bce_with_logits():
    assert np.isclose(bce_with_logits(T(np.zeros(6)), np.full(6, 0.5)).data, np.log(2))
    big = bce_with_logits(T([40.0, -40.0]), np.array([1.0, 0.0])).data
    assert 0 <= big < 1e-15


def test_matmul():
    a = T([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(matmul(a, T([[5.0, 6.0], [7.0, 8.0]])).data, [[19, 22], [43, 50]])
    assert np.array_equal(matmul(a, T(np.eye(2))).data, a.data)
    rng = np.random.default_rng(3)
    x, y = rng.standard_normal((4, 5)), rng.standard_normal((5, 3))
    assert np.allclose(matmul(T(x), T(y)).data, matmul_loops(x, y), atol=1e-9)
    with pytest.raises(ShapeMismatch):
        matmul(T(x), T(x))


def test_batched_matmul():
    rng = np.random.default_rng(4)
    x, y = rng.standard_normal((3, 4, 5)), rng.standard_normal((3, 5, 2))
    out = matmul(T(x), T(y)).data
    for i in range(3):
        assert np.allclose(out[i], matmul_loops(x[i], y[i]))


def test_identity_conv():
    x = np.random.default_rng(5).standard_normal((2, 3, 9))
    w = np.eye(3)[:, :, None]
    assert np.array_equal(conv1d(T(x), T(w), None, 1, "same").data, x)


@pytest.mark.parametrize("d", [1, 2, 4])
def test_causal_impulse(d):
    x = np.zeros((1, 1, 20))
    x[0, 0, 0] = 1.0
    y = conv1d(T(x), T(np.ones((1, 1, 3))), None, d, "causal").data[0, 0]
    assert set(np.flatnonzero(y)) == {0, d, 2 * d}


@settings(max_examples=30)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 4), st.sampled_from([1, 3, 5]), st.integers(1, 4),
       st.integers(1, 12), st.sampled_from(["same", "causal"]))
def test_conv_matches_loops(batch, c_in, c_out, k, dilation, length, mode):
    rng = np.random.default_rng(batch * 100 + length)
    x, w, b = rng.standard_normal((batch, c_in, length)), rng.standard_normal((c_out, c_in, k)), rng.standard_normal(c_out)
    assert np.allclose(conv1d(T(x), T(w), T(b), dilation, mode).data, conv1d_loops(x, w, b, dilation, mode), atol=1e-9)


def test_conv_errors():
    with pytest.raises(ShapeMismatch):
        conv1d(T(np.zeros((1, 2, 5))), T(np.zeros((1, 3, 3))))
    with pytest.raises(ShapeMismatch):
        conv1d(T(np.zeros((1, 2, 5))), T(np.zeros((1, 2, 2))), mode="same")


def test_causal_prefix_invariance():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((1, 3, 30))
    w = rng.standard_normal((4, 3, 3))
    y = conv1d(T(x), T(w), None, 3, "causal").data
    for t in (0, 10, 28):
        x2 = x.copy()
        x2[:, :, t + 1:] = rng.standard_normal(x2[:, :, t + 1:].shape)
        y2 = conv1d(T(x2), T(w), None, 3, "causal").data
        assert np.array_equal(y[:, :, :t + 1], y2[:, :, :t + 1])


@settings(max_examples=20)
@given(st.integers(1, 2), st.integers(1, 3), st.integers(1, 3), st.integers(1, 4), st.integers(1, 8))
def test_transposed_conv_matches_zero_stuffing(batch, c_in, c_out, k, length):
    rng = np.random.default_rng(length * 10 + k)
    x, w, b = rng.standard_normal((batch, c_in, length)), rng.standard_normal((c_out, c_in, k)), rng.standard_normal(c_out)
    y = transposed_conv1d(T(x), T(w), T(b)).data
    assert y.shape == (batch, c_out, 2 * length)
    assert np.allclose(y, transposed_conv_loops(x, w, b), atol=1e-9)


def test_transposed_conv_basics():
    assert transposed_conv1d(T(np.ones((1, 2, 1))), T(np.ones((3, 2, 2)))).shape == (1, 3, 2)
    assert not transposed_conv1d(T(np.zeros((2, 2, 5))), T(np.ones((3, 2, 2)))).data.any()


def test_highway_gates():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((1, 2, 6))
    w = np.zeros((4, 2, 1))
    closed = highway(T(x), T(w), T(np.array([-800.0, -800.0, 5.0, 5.0]))).data
    assert np.allclose(closed, x)
    opened = highway(T(x), T(w), T(np.array([800.0, 800.0, 5.0, -3.0]))).data
    assert np.allclose(opened[0, 0], 5.0) and np.allclose(opened[0, 1], -3.0)


def test_highway_formula():
    rng = np.random.default_rng(8)
    x, w, b = rng.standard_normal((2, 3, 7)), rng.standard_normal((6, 3, 3)), rng.standard_normal(6)
    h = conv1d_loops(x, w, b, 2, "same")
    gate = 1 / (1 + np.exp(-h[:, :3]))
    expected = gate * h[:, 3:] + (1 - gate) * x
    assert np.allclose(highway(T(x), T(w), T(b), 2, "same").data, expected, atol=1e-7)


def test_highway_channel_check():
    with pytest.raises(ShapeMismatch):
        highway(T(np.zeros((1, 2, 4))), T(np.zeros((3, 2, 1))), None)


def test_embedding():
    table = T(np.arange(12.0).reshape(4, 3))
    out = embedding(np.array([[0, 3, 3]]), table)
    assert np.array_equal(out.data[0, 1], [9, 10, 11])
    sum_(out).backward()
    assert np.array_equal(table.grad[:, 0], [1, 0, 0, 2])
    with pytest.raises(IdOutOfRange):
        embedding(np.array([4]), table)


def test_concat_split_inverse():
    x = np.random.default_rng(9).standard_normal((2, 6, 3))
    a, b = split(T(x), 2, axis=1)
    assert np.array_equal(concat([a, b], axis=1).data, x)


def test_float32_by_default():
    x = Tensor([1, 2, 3])
    assert x.dtype == np.float32
    assert sub(x, 1.0).dtype == np.float32


def test_deterministic_forward():
    rng = np.random.default_rng(10)
    x, w = rng.standard_normal((2, 4, 50)).astype(np.float32), rng.standard_normal((8, 4, 3)).astype(np.float32)
    a = conv1d(Tensor(x), Tensor(w), None, 9, "causal").data
    b = conv1d(Tensor(x), Tensor(w), None, 9, "causal").data
    assert np.array_equal(a, b)


def test_grad_check_examples():
    x = np.random.default_rng(11).standard_normal((4, 5))
    assert grad_check(lambda t: sum_(t), x) < 1e-9
    assert grad_check(lambda t: sum_(mul(t, 0.0)), x) < 1e-9
    w = np.random.default_rng(12).standard_normal((3, 4, 3))
    f = lambda t, k: sum_(sigmoid(conv1d(t, k, None, 1, "same")))  # noqa: E731
    assert grad_check(f, [x[None], w]) < 1e-4


def test_grad_check_catches_a_wrong_gradient():
    from byakta.neural.tensor import _make

    def bad_square(t):
        return _make(t.data ** 2, (t,), lambda g: (g * t.data,), "bad_square")  # should be 2 t

    assert grad_check(lambda t: sum_(bad_square(t)), np.random.default_rng(13).uniform(1, 2, 10)) > 0.1
