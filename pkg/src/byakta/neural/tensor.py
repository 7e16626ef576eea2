"""A small reverse-mode autodiff tensor on top of numpy.

Every op records its parents and a closure mapping the output gradient to
parent gradients. `backward` walks the recorded graph in reverse topological
order. Leaf tensors accumulate into `.grad` across calls; intermediate
gradients live only for the duration of one backward pass.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Sequence

import numpy as np

from ..errors import NonFiniteError, ShapeMismatch

_GRAD_ENABLED = True
DEFAULT_DTYPE = np.float32


@contextlib.contextmanager
def no_grad():
    """Evaluate without recording a graph (inference)."""
    global _GRAD_ENABLED
    prev, _GRAD_ENABLED = _GRAD_ENABLED, False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype.kind != "f":
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable | None = None
        self.op = "leaf"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, op={self.op})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self, grad=None) -> None:
        backward(self, grad)


def as_tensor(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(x, dtype=dtype))


def _make(data: np.ndarray, parents: Sequence[Tensor], backward_fn: Callable, op: str) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op} produced non-finite values")
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    out.op = op
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _topological(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    state: dict[int, int] = {}  # 1 = on stack, 2 = done
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if expanded:
            state[key] = 2
            order.append(node)
            continue
        if state.get(key) == 2:
            continue
        if state.get(key) == 1:
            continue
        state[key] = 1
        stack.append((node, True))
        for p in node._parents:
            s = state.get(id(p))
            assert s != 1 or p is node, "computation graph has a cycle"
            if s is None:
                stack.append((p, False))
    return order


def backward(loss: Tensor, grad=None) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable leaf's `.grad`."""
    if not loss.requires_grad:
        return
    if grad is None:
        if loss.data.size != 1:
            raise ShapeMismatch("backward() without a seed gradient needs a scalar loss")
        grad = np.ones_like(loss.data)
    grads: dict[int, np.ndarray] = {id(loss): np.asarray(grad, dtype=loss.dtype)}
    for node in reversed(_topological(loss)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = grads[key] + pg if key in grads else pg


# ---------------------------------------------------------------- elementwise

def add(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, a)
    return _make(a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def sub(a, b) -> Tensor:
    if not isinstance(a, Tensor):
        a = as_tensor(a, b)
    b = as_tensor(b, a)
    return _make(a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)), "sub")


def mul(a, b) -> Tensor:
    a = as_tensor(a)
    b = as_tensor(b, a)
    return _make(a.data * b.data, (a, b),
                 lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)), "mul")


def sigmoid(x: Tensor) -> Tensor:
    # Split by sign so exp never overflows.
    d = x.data
    e = np.exp(-np.abs(d))
    y = np.where(d >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(d.dtype)
    return _make(y, (x,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return _make(np.where(mask, x.data, 0).astype(x.dtype), (x,), lambda g: (g * mask,), "relu")


def absolute(x: Tensor) -> Tensor:
    sign = np.sign(x.data)
    return _make(np.abs(x.data), (x,), lambda g: (g * sign,), "abs")


def softmax(x: Tensor, axis: int = -1, mask: np.ndarray | None = None) -> Tensor:
    """Softmax along `axis`. Entries where `mask` is False get probability 0."""
    d = x.data
    if mask is not None:
        mask = np.broadcast_to(mask, d.shape)
        if not np.all(mask.any(axis=axis)):
            raise ValueError("softmax mask leaves an empty slice")
        d = np.where(mask, d, -np.inf)
    z = d - np.max(d, axis=axis, keepdims=True)
    e = np.exp(z)
    y = (e / e.sum(axis=axis, keepdims=True)).astype(x.dtype)

    def back(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return _make(y, (x,), back, "softmax")


def bce_with_logits(logits: Tensor, target, weights: np.ndarray | None = None) -> Tensor:
    """Mean binary cross-entropy of `target` under sigmoid(`logits`).

    Computed as max(z, 0) - z*t + log(1 + exp(-|z|)). With `weights`, a
    weighted mean (weights broadcast against the logits).
    """
    z = logits.data
    t = np.asarray(target, dtype=z.dtype)
    if t.shape != z.shape:
        raise ShapeMismatch(f"target {t.shape} vs logits {z.shape}")
    w = np.ones_like(z) if weights is None else np.broadcast_to(weights, z.shape).astype(z.dtype)
    total = w.sum()
    per = np.maximum(z, 0) - z * t + np.log1p(np.exp(-np.abs(z)))
    value = np.asarray((per * w).sum() / total, dtype=z.dtype)
    e = np.exp(-np.abs(z))
    sig = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))

    def back(g):
        return ((g * w * (sig - t) / total).astype(z.dtype),)

    return _make(value, (logits,), back, "bce_with_logits")


# ---------------------------------------------------------------- reductions and shape

def sum_(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    y = np.sum(x.data, axis=axis, keepdims=keepdims)

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).astype(x.dtype),)

    return _make(np.asarray(y), (x,), back, "sum")


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = x.data.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return mul(sum_(x, axis, keepdims), 1.0 / n)


def reshape(x: Tensor, shape) -> Tensor:
    return _make(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),), "reshape")


def transpose(x: Tensor, axes) -> Tensor:
    inv = np.argsort(axes)
    return _make(np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inv),), "transpose")


def concat(xs: Sequence[Tensor], axis: int) -> Tensor:
    sizes = [x.shape[axis] for x in xs]
    splits = np.cumsum(sizes)[:-1]
    return _make(np.concatenate([x.data for x in xs], axis=axis), tuple(xs),
                 lambda g: tuple(np.split(g, splits, axis=axis)), "concat")


def narrow(x: Tensor, axis: int, start: int, stop: int) -> Tensor:
    """x[..., start:stop, ...] along `axis`."""
    index = [slice(None)] * x.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)

    def back(g):
        out = np.zeros_like(x.data)
        out[index] = g
        return (out,)

    return _make(x.data[index], (x,), back, "narrow")


def split(x: Tensor, parts: int, axis: int) -> list[Tensor]:
    n = x.shape[axis]
    if n % parts:
        raise ShapeMismatch(f"cannot split extent {n} into {parts} parts")
    step = n // parts
    return [narrow(x, axis, i * step, (i + 1) * step) for i in range(parts)]


def embedding(ids: np.ndarray, table: Tensor) -> Tensor:
    """Row lookup: ids (...,) -> (..., e)."""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        from ..errors import IdOutOfRange
        raise IdOutOfRange(f"ids must be in [0, {table.shape[0]})")

    def back(g):
        out = np.zeros_like(table.data)
        np.add.at(out, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        return (out,)

    return _make(table.data[ids], (table,), back, "embedding")


# ---------------------------------------------------------------- linear algebra

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product, batched over matching leading axes."""
    a = as_tensor(a)
    b = as_tensor(b, a)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul of {a.shape} and {b.shape}")

    def back(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _make(a.data @ b.data, (a, b), back, "matmul")


def conv1d(x: Tensor, w: Tensor, b: Tensor | None = None, dilation: int = 1, mode: str = "same") -> Tensor:
    """1-D convolution, length preserving.

    x: (batch, C_in, L); w: (C_out, C_in, K); b: (C_out,).
    "causal" pads (K-1)*dilation zeros on the left only, so output[t]
    depends on inputs <= t. "same" pads symmetrically and needs odd K.
    """
    if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[1]:
        raise ShapeMismatch(f"conv1d of input {x.shape} with kernel {w.shape}")
    if dilation < 1:
        raise ValueError("dilation must be >= 1")
    c_out, c_in, k = w.shape
    batch, _, length = x.shape
    span = (k - 1) * dilation
    if mode == "causal":
        left, right = span, 0
    elif mode == "same":
        if k % 2 == 0:
            raise ShapeMismatch("same-mode convolution needs an odd kernel")
        left = right = span // 2
    else:
        raise ValueError(f"unknown conv mode {mode!r}")

    xp = np.pad(x.data, ((0, 0), (0, 0), (left, right)))
    # cols[b, c, j, t] = xp[b, c, t + j*dilation]
    cols = np.stack([xp[:, :, j * dilation:j * dilation + length] for j in range(k)], axis=2)
    cols = cols.reshape(batch, c_in * k, length)
    w2 = w.data.reshape(c_out, c_in * k)
    y = w2 @ cols
    if b is not None:
        y = y + b.data[None, :, None]
    parents = (x, w) if b is None else (x, w, b)

    def back(g):
        gw = np.einsum("bot,bkt->ok", g, cols).reshape(w.shape) if w.requires_grad else None
        gx = None
        if x.requires_grad:
            gcols = (w2.T @ g).reshape(batch, c_in, k, length)
            gxp = np.zeros_like(xp)
            for j in range(k):
                gxp[:, :, j * dilation:j * dilation + length] += gcols[:, :, j]
            gx = gxp[:, :, left:left + length]
        if b is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2))

    return _make(y, parents, back, f"conv1d_{mode}")


def transposed_conv1d(x: Tensor, w: Tensor, b: Tensor | None = None, stride: int = 2) -> Tensor:
    """Stride-2 transposed convolution: (batch, C_in, L) -> (batch, C_out, 2L).

    w: (C_out, C_in, K). Input frame i writes w[:, :, j] @ x[i] to output
    position stride*i + j; the result is truncated to stride*L frames.
    """
    if stride != 2:
        raise ValueError("only stride 2 is supported")
    if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[1]:
        raise ShapeMismatch(f"transposed_conv1d of input {x.shape} with kernel {w.shape}")
    c_out, c_in, k = w.shape
    batch, _, length = x.shape
    out_len = stride * length
    full = np.zeros((batch, c_out, stride * (length - 1) + k + stride), dtype=np.result_type(x.data, w.data))
    for j in range(k):
        full[:, :, j:j + out_len:stride] += np.einsum("oc,bcl->bol", w.data[:, :, j], x.data)
    y = full[:, :, :out_len]
    if b is not None:
        y = y + b.data[None, :, None]
    parents = (x, w) if b is None else (x, w, b)

    def back(g):
        gfull = np.zeros_like(full)
        gfull[:, :, :out_len] = g
        gx = np.zeros_like(x.data)
        gw = np.zeros_like(w.data)
        for j in range(k):
            gj = gfull[:, :, j:j + out_len:stride]
            gx += np.einsum("oc,bol->bcl", w.data[:, :, j], gj)
            gw[:, :, j] = np.einsum("bol,bcl->oc", gj, x.data)
        if b is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2))

    return _make(np.ascontiguousarray(y), parents, back, "transposed_conv1d")


def highway(x: Tensor, w: Tensor, b: Tensor | None, dilation: int = 1, mode: str = "same") -> Tensor:
    """Gated residual block: H = conv(x) with 2C channels split into H1, H2;
    y = sigmoid(H1) * H2 + (1 - sigmoid(H1)) * x."""
    h = conv1d(x, w, b, dilation, mode)
    if h.shape[1] != 2 * x.shape[1]:
        raise ShapeMismatch(f"highway conv must produce {2 * x.shape[1]} channels, got {h.shape[1]}")
    h1, h2 = split(h, 2, axis=1)
    gate = sigmoid(h1)
    return add(mul(gate, h2), mul(sub(1.0, gate), x))
