"""Finite-difference verification of backward()."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor

# Below this magnitude two gradients are compared absolutely, not relatively.
ABS_FLOOR = 1e-7


def _flat_coordinates(shapes, n_samples, rng):
    sizes = [int(np.prod(s)) for s in shapes]
    total = sum(sizes)
    if total <= n_samples:
        flat = np.arange(total)
    else:
        flat = np.sort(rng.choice(total, size=n_samples, replace=False))
    offsets = np.cumsum([0] + sizes)
    out = []
    for f in flat:
        i = int(np.searchsorted(offsets, f, side="right") - 1)
        out.append((i, int(f - offsets[i])))
    return out


def grad_check(f: Callable[..., Tensor], inputs: Sequence[np.ndarray] | np.ndarray, eps: float = 1e-4,
               n_samples: int = 64, seed: int = 0) -> float:
    """Max relative error between backward() and central differences.

    `f` maps Tensors (one per input array) to a scalar Tensor. Inputs are
    promoted to float64. At most `n_samples` coordinates are probed (all of
    them if there are fewer).
    """
    if isinstance(inputs, np.ndarray):
        inputs = [inputs]
    arrays = [np.array(a, dtype=np.float64) for a in inputs]
    tensors = [Tensor(a, requires_grad=True) for a in arrays]
    loss = f(*tensors)
    loss.backward()
    analytic = [t.grad if t.grad is not None else np.zeros_like(t.data) for t in tensors]

    def value():
        return float(f(*[Tensor(a) for a in arrays]).data)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for i, flat in _flat_coordinates([a.shape for a in arrays], n_samples, rng):
        view = arrays[i].reshape(-1)
        orig = view[flat]
        view[flat] = orig + eps
        up = value()
        view[flat] = orig - eps
        down = value()
        view[flat] = orig
        numeric = (up - down) / (2 * eps)
        a = float(analytic[i].reshape(-1)[flat])
        err = abs(a - numeric) / max(abs(a), abs(numeric), ABS_FLOOR)
        worst = max(worst, err)
    return worst
