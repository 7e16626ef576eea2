"""Declarative conv stacks shared by Text2Mel and SSRN."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..neural import ParameterSet, Tensor, conv1d, fan_in_uniform, highway, relu, transposed_conv1d


@dataclass(frozen=True)
class Conv:
    name: str
    c_in: int
    c_out: int
    k: int = 1
    dilation: int = 1
    relu: bool = False


@dataclass(frozen=True)
class Highway:
    name: str
    channels: int
    k: int = 3
    dilation: int = 1


@dataclass(frozen=True)
class Deconv:
    name: str
    c_in: int
    c_out: int
    k: int = 2


Layer = Conv | Highway | Deconv


def _kernel_shape(layer: Layer) -> tuple[int, int, int]:
    if isinstance(layer, Highway):
        return (2 * layer.channels, layer.channels, layer.k)
    return (layer.c_out, layer.c_in, layer.k)


def init_stack(layers: Sequence[Layer], rng: np.random.Generator, params: ParameterSet) -> None:
    for layer in layers:
        c_out, c_in, k = _kernel_shape(layer)
        params[f"{layer.name}.w"] = fan_in_uniform(rng, (c_out, c_in, k), c_in * k)
        params[f"{layer.name}.b"] = np.zeros(c_out, dtype=np.float32)


def run_stack(x: Tensor, layers: Sequence[Layer], params: ParameterSet, mode: str) -> Tensor:
    for layer in layers:
        w, b = params[f"{layer.name}.w"], params[f"{layer.name}.b"]
        if isinstance(layer, Highway):
            x = highway(x, w, b, layer.dilation, mode)
        elif isinstance(layer, Deconv):
            x = transposed_conv1d(x, w, b, stride=2)
        else:
            x = conv1d(x, w, b, layer.dilation, mode)
            if layer.relu:
                x = relu(x)
    return x
