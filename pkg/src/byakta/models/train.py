"""Training steps for Text2Mel and SSRN."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..neural import OptimizerState, ParameterSet, adam_step
from .config import ModelConfig
from .losses import batch_guided_mask, guided_attention_loss, spectrogram_loss
from .ssrn import ssrn
from .text2mel import forward_text2mel


@dataclass(frozen=True)
class Text2MelBatch:
    ids: np.ndarray          # (batch, N), PAD = 0
    mels: np.ndarray         # (batch, n_mels, T), zero padded
    text_lengths: np.ndarray
    frame_lengths: np.ndarray

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[Sequence[int], np.ndarray]]) -> "Text2MelBatch":
        """pairs of (token ids, coarse mel (n_mels, T))."""
        n = max(len(ids) for ids, _ in pairs)
        t = max(mel.shape[1] for _, mel in pairs)
        n_mels = pairs[0][1].shape[0]
        ids = np.zeros((len(pairs), n), dtype=np.int64)
        mels = np.zeros((len(pairs), n_mels, t), dtype=np.float32)
        for i, (tok, mel) in enumerate(pairs):
            ids[i, :len(tok)] = tok
            mels[i, :, :mel.shape[1]] = mel
        return cls(ids, mels, np.array([len(p[0]) for p in pairs]), np.array([p[1].shape[1] for p in pairs]))

    def decoder_inputs(self) -> np.ndarray:
        """Targets shifted right by one frame with a zero frame in front."""
        shifted = np.zeros_like(self.mels)
        shifted[:, :, 1:] = self.mels[:, :, :-1]
        return shifted

    def key_mask(self) -> np.ndarray:
        return np.arange(self.ids.shape[1])[None, :] < self.text_lengths[:, None]

    def frame_mask(self) -> np.ndarray:
        return np.arange(self.mels.shape[2])[None, :] < self.frame_lengths[:, None]


@dataclass(frozen=True)
class Text2MelLosses:
    l1: float
    bce: float
    attention: float

    @property
    def total(self) -> float:
        return self.l1 + self.bce + self.attention


def text2mel_loss(batch: Text2MelBatch, params: ParameterSet, cfg: ModelConfig):
    """Returns (total loss Tensor, (l1, bce, attention) Tensors, A)."""
    mels_in = batch.decoder_inputs().astype(params["audioenc.c0.w"].dtype)
    logits, mel, a = forward_text2mel(batch.ids, mels_in, params, cfg, key_mask=batch.key_mask())
    spec, l1, bce = spectrogram_loss(mel, logits, batch.mels, batch.frame_mask())
    w, valid = batch_guided_mask(batch.text_lengths, batch.frame_lengths, *a.shape[1:], cfg.g)
    att = guided_attention_loss(a, w, valid)
    return spec + att, (l1, bce, att), a


def train_step_text2mel(batch: Text2MelBatch, params: ParameterSet, opt: OptimizerState,
                        cfg: ModelConfig) -> Text2MelLosses:
    params.zero_grad()
    total, (l1, bce, att), _ = text2mel_loss(batch, params, cfg)
    total.backward()
    adam_step(params, opt)
    return Text2MelLosses(float(l1.data), float(bce.data), float(att.data))


@dataclass(frozen=True)
class SsrnBatch:
    coarse: np.ndarray       # (batch, n_mels, T)
    linear: np.ndarray       # (batch, bins, 4T)
    frame_lengths: np.ndarray  # coarse frames per row

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[np.ndarray, np.ndarray]], r: int = 4) -> "SsrnBatch":
        t = max(c.shape[1] for c, _ in pairs)
        coarse = np.zeros((len(pairs), pairs[0][0].shape[0], t), dtype=np.float32)
        linear = np.zeros((len(pairs), pairs[0][1].shape[0], r * t), dtype=np.float32)
        for i, (c, lin) in enumerate(pairs):
            coarse[i, :, :c.shape[1]] = c
            n = min(lin.shape[1], r * c.shape[1])
            linear[i, :, :n] = lin[:, :n]
        return cls(coarse, linear, np.array([c.shape[1] for c, _ in pairs]))

    def frame_mask(self, r: int = 4) -> np.ndarray:
        return np.arange(self.linear.shape[2])[None, :] < r * self.frame_lengths[:, None]


def ssrn_loss(batch: SsrnBatch, params: ParameterSet, cfg: ModelConfig):
    logits, mag = ssrn(batch.coarse.astype(params["ssrn.c0.w"].dtype), params, cfg)
    return spectrogram_loss(mag, logits, batch.linear, batch.frame_mask(cfg.r))


def train_step_ssrn(batch: SsrnBatch, params: ParameterSet, opt: OptimizerState, cfg: ModelConfig) -> float:
    params.zero_grad()
    total, _, _ = ssrn_loss(batch, params, cfg)
    total.backward()
    adam_step(params, opt)
    return float(total.data)
