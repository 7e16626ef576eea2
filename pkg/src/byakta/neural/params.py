"""Named parameter collections and the fan-in initializer."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .tensor import DEFAULT_DTYPE, Tensor


class ParameterSet(OrderedDict):
    """Ordered map name -> Tensor. Names are stable across save/load."""

    def __setitem__(self, name, value):
        if not isinstance(value, Tensor):
            value = Tensor(np.asarray(value, dtype=DEFAULT_DTYPE), requires_grad=True)
        super().__setitem__(name, value)

    def zero_grad(self) -> None:
        for p in self.values():
            p.grad = None

    def copy(self) -> "ParameterSet":
        out = ParameterSet()
        for name, p in self.items():
            out[name] = Tensor(p.data.copy(), requires_grad=p.requires_grad)
        return out

    def astype(self, dtype) -> "ParameterSet":
        out = ParameterSet()
        for name, p in self.items():
            out[name] = Tensor(p.data.astype(dtype), requires_grad=True)
        return out

    def with_prefix(self, prefix: str) -> "ParameterSet":
        out = ParameterSet()
        for name, p in self.items():
            out[prefix + name] = p
        return out

    def strip_prefix(self, prefix: str) -> "ParameterSet":
        out = ParameterSet()
        for name, p in self.items():
            if name.startswith(prefix):
                out[name[len(prefix):]] = p
        return out

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.values())


def fan_in_uniform(rng: np.random.Generator, shape, fan_in: int, dtype=DEFAULT_DTYPE) -> np.ndarray:
    bound = np.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)
