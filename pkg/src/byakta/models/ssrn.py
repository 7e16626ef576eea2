"""SSRN: coarse mel (batch, n_mels, T) -> linear magnitude (batch, bins, 4T)."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from ..neural import ParameterSet, Tensor, sigmoid
from .config import ModelConfig
from .layers import Conv, Deconv, Highway, init_stack, run_stack


def ssrn_layers(cfg: ModelConfig):
    c = cfg.c
    layers = [Conv("ssrn.c0", cfg.n_mels, c), Highway("ssrn.hc0", c, 3, 1), Highway("ssrn.hc1", c, 3, 3)]
    for i in range(2):
        layers += [Deconv(f"ssrn.up{i}", c, c), Highway(f"ssrn.up{i}.hc0", c, 3, 1),
                   Highway(f"ssrn.up{i}.hc1", c, 3, 3)]
    layers += [Conv("ssrn.c1", c, 2 * c), Highway("ssrn.hc2", 2 * c, 3, 1), Highway("ssrn.hc3", 2 * c, 3, 1),
               Conv("ssrn.c2", 2 * c, c, relu=True), Conv("ssrn.out", c, cfg.bins)]
    return layers


def init_ssrn(cfg: ModelConfig, seed: int = 1) -> ParameterSet:
    params = ParameterSet()
    init_stack(ssrn_layers(cfg), np.random.default_rng(seed), params)
    return params


def ssrn(coarse, params: ParameterSet, cfg: ModelConfig) -> tuple[Tensor, Tensor]:
    """Returns (magnitude logits, magnitude in (0, 1))."""
    x = coarse if isinstance(coarse, Tensor) else Tensor(np.asarray(coarse, dtype=params["ssrn.c0.w"].dtype))
    if x.ndim != 3 or x.shape[1] != cfg.n_mels:
        raise ShapeMismatch(f"coarse mels must be (batch, {cfg.n_mels}, T), got {x.shape}")
    logits = run_stack(x, ssrn_layers(cfg), params, "same")
    return logits, sigmoid(logits)
