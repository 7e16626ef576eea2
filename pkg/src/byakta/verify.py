"""Finite-difference verification of every differentiable kernel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models.config import ModelConfig
from .models.losses import guided_attention_loss, guided_attention_mask, spectrogram_loss
from .models.layers import run_stack
from .models.ssrn import init_ssrn, ssrn, ssrn_layers
from .models.text2mel import init_text2mel
from .models.train import SsrnBatch, Text2MelBatch, ssrn_loss, text2mel_loss
from .neural import (ParameterSet, Tensor, absolute, add, bce_with_logits, concat, conv1d, embedding, grad_check,
                     highway, matmul, mean, mul, narrow, relu, reshape, sigmoid, softmax, split, sub, sum_,
                     transpose, transposed_conv1d)

TOLERANCE = 1e-4


@dataclass(frozen=True)
class Check:
    name: str
    error: float

    @property
    def ok(self) -> bool:
        return self.error < TOLERANCE


def _projected(op: Callable, out_shape, rng) -> Callable:
    """Reduce op's output to a scalar through a fixed random projection."""
    r = rng.standard_normal(out_shape)
    return lambda *ts: sum_(mul(op(*ts), r))


def _away_from_zero(rng, shape, margin=0.05):
    x = rng.standard_normal(shape)
    return np.where(np.abs(x) < margin, np.sign(x + 1e-12) * margin, x)


def tiny_model_config() -> ModelConfig:
    return ModelConfig(vocab_size=7, d=8, e=8, c=8, n_mels=6, bins=9)


def _text2mel_case(cfg: ModelConfig, rng):
    names = list(init_text2mel(cfg, seed=3).items())
    ids = np.array([[2, 3, 4, 5, 1], [6, 2, 1, 0, 0]])
    mels = rng.uniform(0.05, 0.95, (2, cfg.n_mels, 6))
    mels[1, :, 4:] = 0
    batch = Text2MelBatch(ids, mels, np.array([5, 3]), np.array([6, 4]))

    def loss(*tensors):
        params = ParameterSet(zip([n for n, _ in names], tensors))
        return text2mel_loss(batch, params, cfg)[0]

    return loss, [p.data for _, p in names]


def _clear_of_zero(pre: np.ndarray, margin: float) -> np.ndarray:
    """Smallest non-negative per-channel offsets keeping (batch, C, T)
    pre-activations >= margin away from 0. Shifting up keeps units alive."""
    offsets = np.zeros(pre.shape[1])
    for ch in range(pre.shape[1]):
        vals = pre[:, ch].ravel()
        for delta in np.linspace(0.0, 1.0, 401):
            if np.abs(vals + delta).min() >= margin:
                offsets[ch] = delta
                break
    return offsets


def _ssrn_case(cfg: ModelConfig, rng, margin: float = 1e-2):
    """SSRN loss at a point that is smooth within `margin` of every probe:
    no ReLU input and no L1 residual is near its kink."""
    params = init_ssrn(cfg, seed=4)
    layers = ssrn_layers(cfg)
    coarse = [rng.uniform(0.05, 0.95, (cfg.n_mels, 3)), rng.uniform(0.05, 0.95, (cfg.n_mels, 2))]
    x = Tensor(np.stack([np.pad(c, ((0, 0), (0, 3 - c.shape[1]))) for c in coarse]))
    # layers[-2] is the ReLU conv
    h = run_stack(x, layers[:-2], params, "same")
    relu_conv = layers[-2]
    pre = conv1d(h, params[f"{relu_conv.name}.w"], params[f"{relu_conv.name}.b"]).data
    params[f"{relu_conv.name}.b"] = params[f"{relu_conv.name}.b"].data + _clear_of_zero(pre, margin)
    _, mag = ssrn(x, params, cfg)
    step = rng.uniform(0.05, 0.3, mag.shape)
    target = np.where(mag.data > 0.5, mag.data - step, mag.data + step)
    pairs = [(c, target[i, :, :4 * c.shape[1]]) for i, c in enumerate(coarse)]
    batch = SsrnBatch.from_pairs(pairs, cfg.r)
    names = list(params)

    def loss(*tensors):
        return ssrn_loss(batch, ParameterSet(zip(names, tensors)), cfg)[0]

    return loss, [p.data for p in params.values()]


def kernel_cases(seed: int = 0) -> list[tuple[str, Callable, list]]:
    rng = np.random.default_rng(seed)
    x34 = rng.standard_normal((3, 4))
    y34 = rng.standard_normal((3, 4))
    seq = rng.standard_normal((2, 3, 7))
    soft_target = rng.uniform(0, 1, (3, 4))
    cases = [
        ("add", _projected(add, (3, 4), rng), [x34, rng.standard_normal((1, 4))]),
        ("sub", _projected(sub, (3, 4), rng), [x34, y34]),
        ("mul", _projected(mul, (3, 4), rng), [x34, y34]),
        ("sigmoid", _projected(sigmoid, (3, 4), rng), [x34 * 3]),
        ("relu", _projected(relu, (3, 4), rng), [_away_from_zero(rng, (3, 4))]),
        ("absolute", _projected(absolute, (3, 4), rng), [_away_from_zero(rng, (3, 4))]),
        ("softmax", _projected(lambda t: softmax(t, axis=1), (3, 4), rng), [x34]),
        ("softmax_masked", _projected(lambda t: softmax(t, axis=1, mask=np.array([True, False, True, True])),
                                      (3, 4), rng), [x34]),
        ("bce_with_logits", lambda t: bce_with_logits(t, soft_target), [x34]),
        ("sum", lambda t: sum_(mul(sum_(t, axis=0), np.arange(4.0))), [x34]),
        ("mean", lambda t: sum_(mul(mean(t, axis=1, keepdims=True), np.arange(3.0)[:, None])), [x34]),
        ("reshape", _projected(lambda t: reshape(t, (4, 3)), (4, 3), rng), [x34]),
        ("transpose", _projected(lambda t: transpose(t, (1, 0)), (4, 3), rng), [x34]),
        ("concat", _projected(lambda a, b: concat([a, b], axis=1), (3, 8), rng), [x34, y34]),
        ("narrow", _projected(lambda t: narrow(t, 1, 1, 3), (3, 2), rng), [x34]),
        ("split", _projected(lambda t: mul(split(t, 2, axis=1)[0], split(t, 2, axis=1)[1]), (3, 2), rng), [x34]),
        ("embedding", _projected(lambda t: embedding(np.array([[0, 2, 2], [1, 0, 3]]), t), (2, 3, 4), rng),
         [rng.standard_normal((4, 4))]),
        ("matmul", _projected(matmul, (2, 3, 5), rng), [rng.standard_normal((2, 3, 4)),
                                                        rng.standard_normal((2, 4, 5))]),
        ("conv1d_same", _projected(lambda x, w, b: conv1d(x, w, b, dilation=2, mode="same"), (2, 5, 7), rng),
         [seq, rng.standard_normal((5, 3, 3)), rng.standard_normal(5)]),
        ("conv1d_causal", _projected(lambda x, w, b: conv1d(x, w, b, dilation=3, mode="causal"), (2, 5, 7),
                                     rng), [seq, rng.standard_normal((5, 3, 3)), rng.standard_normal(5)]),
        ("transposed_conv1d", _projected(transposed_conv1d, (2, 4, 14), rng),
         [seq, rng.standard_normal((4, 3, 2)), rng.standard_normal(4)]),
        ("highway", _projected(lambda x, w, b: highway(x, w, b, dilation=2, mode="causal"), (2, 3, 7), rng),
         [seq, rng.standard_normal((6, 3, 3)), rng.standard_normal(6)]),
    ]
    a_shape = (2, 5, 6)
    w = guided_attention_mask(5, 6, 0.2)
    cases.append(("guided_attention_loss",
                  lambda t: guided_attention_loss(softmax(t, axis=1), w), [rng.standard_normal(a_shape)]))
    target = rng.uniform(0, 1, (2, 3, 4))
    mask = np.array([[1, 1, 1, 0], [1, 1, 0, 0]], dtype=bool)
    cases.append(("spectrogram_loss",
                  lambda t: spectrogram_loss(sigmoid(t), t, target, mask)[0], [rng.standard_normal((2, 3, 4))]))
    cfg = tiny_model_config()
    f, inputs = _text2mel_case(cfg, rng)
    cases.append(("text2mel_loss", f, inputs))
    f, inputs = _ssrn_case(cfg, rng)
    cases.append(("ssrn_loss", f, inputs))
    return cases


def run_kernel_checks(seed: int = 0, n_samples: int = 64) -> list[Check]:
    return [Check(name, grad_check(f, inputs, n_samples=n_samples, seed=seed))
            for name, f, inputs in kernel_cases(seed)]
