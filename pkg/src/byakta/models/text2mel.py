"""Text2Mel: text encoder, causal audio encoder, dot-product attention and
causal audio decoder, predicting coarse mel frames one step ahead."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import IdOutOfRange, ShapeMismatch
from ..neural import (ParameterSet, Tensor, concat, embedding, fan_in_uniform, matmul, mul, sigmoid, softmax,
                      split, transpose)
from .config import ModelConfig
from .layers import Conv, Highway, init_stack, run_stack

EMBED = "textenc.embed"
TEXT_DILATIONS = (1, 3, 9, 27, 1, 3, 9, 27, 1, 1)
AUDIO_ENC_DILATIONS = (1, 3, 9, 27, 1, 3, 9, 27, 3, 3)
AUDIO_DEC_DILATIONS = (1, 3, 9, 27, 1, 1)


def text_encoder_layers(cfg: ModelConfig):
    d2 = 2 * cfg.d
    layers = [Conv("textenc.c0", cfg.e, d2, relu=True), Conv("textenc.c1", d2, d2)]
    layers += [Highway(f"textenc.hc{i}", d2, 3, dil) for i, dil in enumerate(TEXT_DILATIONS)]
    return layers


def audio_encoder_layers(cfg: ModelConfig):
    d = cfg.d
    layers = [Conv("audioenc.c0", cfg.n_mels, d, relu=True), Conv("audioenc.c1", d, d, relu=True),
              Conv("audioenc.c2", d, d)]
    layers += [Highway(f"audioenc.hc{i}", d, 3, dil) for i, dil in enumerate(AUDIO_ENC_DILATIONS)]
    return layers


def audio_decoder_layers(cfg: ModelConfig):
    d = cfg.d
    layers = [Conv("audiodec.c0", 2 * d, d)]
    layers += [Highway(f"audiodec.hc{i}", d, 3, dil) for i, dil in enumerate(AUDIO_DEC_DILATIONS)]
    layers += [Conv(f"audiodec.c{i}", d, d, relu=True) for i in (1, 2, 3)]
    layers += [Conv("audiodec.out", d, cfg.n_mels)]
    return layers


def init_text2mel(cfg: ModelConfig, seed: int = 0) -> ParameterSet:
    rng = np.random.default_rng(seed)
    params = ParameterSet()
    params[EMBED] = fan_in_uniform(rng, (cfg.vocab_size, cfg.e), cfg.e)
    init_stack(text_encoder_layers(cfg), rng, params)
    init_stack(audio_encoder_layers(cfg), rng, params)
    init_stack(audio_decoder_layers(cfg), rng, params)
    return params


def text_encoder(ids: np.ndarray, params: ParameterSet, cfg: ModelConfig) -> tuple[Tensor, Tensor]:
    """ids (batch, N) -> keys, values, each (batch, d, N)."""
    ids = np.asarray(ids)
    if ids.ndim != 2:
        raise ShapeMismatch(f"ids must be (batch, N), got {ids.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= cfg.vocab_size):
        raise IdOutOfRange(f"ids must lie in [0, {cfg.vocab_size})")
    x = transpose(embedding(ids, params[EMBED]), (0, 2, 1))
    h = run_stack(x, text_encoder_layers(cfg), params, "same")
    keys, values = split(h, 2, axis=1)
    return keys, values


def audio_encoder(mels, params: ParameterSet, cfg: ModelConfig) -> Tensor:
    """mels (batch, n_mels, T) -> queries (batch, d, T); strictly causal."""
    mels = mels if isinstance(mels, Tensor) else Tensor(np.asarray(mels, dtype=params[EMBED].dtype))
    if mels.ndim != 3 or mels.shape[1] != cfg.n_mels:
        raise ShapeMismatch(f"mels must be (batch, {cfg.n_mels}, T), got {mels.shape}")
    return run_stack(mels, audio_encoder_layers(cfg), params, "causal")


def audio_decoder(r: Tensor, q: Tensor, params: ParameterSet, cfg: ModelConfig) -> tuple[Tensor, Tensor]:
    """(R, Q) -> (mel logits, mel in (0, 1)), each (batch, n_mels, T)."""
    if r.shape != q.shape:
        raise ShapeMismatch(f"R {r.shape} and Q {q.shape} must match")
    logits = run_stack(concat([r, q], axis=1), audio_decoder_layers(cfg), params, "causal")
    return logits, sigmoid(logits)


@dataclass
class SynthesisState:
    """Per-row bookkeeping for monotonic autoregressive decoding."""

    batch: int
    position: np.ndarray = None          # last attended text index
    centres: list = field(default_factory=list)  # window centre used for each generated column
    dwell: np.ndarray = None             # consecutive frames attended on END
    stopped: np.ndarray = None
    lengths: np.ndarray = None
    frames: int = 0

    def __post_init__(self):
        self.position = np.zeros(self.batch, dtype=np.int64)
        self.dwell = np.zeros(self.batch, dtype=np.int64)
        self.stopped = np.zeros(self.batch, dtype=bool)
        self.lengths = np.zeros(self.batch, dtype=np.int64)


def monotonic_mask(centres: np.ndarray, n: int, back: int, ahead: int) -> np.ndarray:
    """centres (batch, T) -> bool (batch, n, T): keep n in [c - back, c + ahead]."""
    idx = np.arange(n)[None, :, None]
    c = centres[:, None, :]
    return (idx >= c - back) & (idx <= c + ahead)


def attend(keys: Tensor, values: Tensor, queries: Tensor, key_mask: np.ndarray | None = None,
           monotonic: bool = False, state: SynthesisState | None = None,
           cfg: ModelConfig | None = None) -> tuple[Tensor, Tensor]:
    """Scaled dot-product attention over text positions.

    Returns A (batch, N, T), softmax over N for every frame, and R = V A
    (batch, d, T). In monotonic mode the newest column is confined to a
    window around the previously attended position and `state` is advanced.
    """
    if keys.shape != values.shape or keys.shape[:2] != queries.shape[:2]:
        raise ShapeMismatch(f"K {keys.shape}, V {values.shape}, Q {queries.shape} are inconsistent")
    batch, d, n = keys.shape
    t = queries.shape[2]
    scores = mul(matmul(transpose(keys, (0, 2, 1)), queries), 1.0 / np.sqrt(d))
    mask = np.ones((batch, n, t), dtype=bool)
    if key_mask is not None:
        mask &= np.asarray(key_mask, dtype=bool)[:, :, None]
    if monotonic:
        if state is None:
            raise ValueError("monotonic attention needs a SynthesisState")
        cfg = cfg or ModelConfig()
        if len(state.centres) != t - 1:
            raise ShapeMismatch(f"state covers {len(state.centres)} frames, queries have {t}")
        centres = np.stack(state.centres + [state.position.copy()], axis=1)
        window = monotonic_mask(centres, n, cfg.window_back, cfg.window_ahead)
        # never leave a column empty: fall back to the key mask alone
        window |= ~(window & mask).any(axis=1, keepdims=True)
        mask &= window
    a = softmax(scores, axis=1, mask=mask)
    if monotonic:
        state.centres.append(state.position.copy())
        state.position = np.argmax(a.data[:, :, -1], axis=1)
    return a, matmul(values, a)


def forward_text2mel(ids: np.ndarray, mels_in, params: ParameterSet, cfg: ModelConfig, key_mask=None):
    """Teacher-forced pass. Returns (logits, mel, A)."""
    keys, values = text_encoder(ids, params, cfg)
    q = audio_encoder(mels_in, params, cfg)
    a, r = attend(keys, values, q, key_mask=key_mask)
    logits, mel = audio_decoder(r, q, params, cfg)
    return logits, mel, a
