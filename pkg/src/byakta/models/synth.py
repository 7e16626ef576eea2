"""Autoregressive coarse-mel generation with monotonic attention."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..neural import ParameterSet, no_grad
from .config import ModelConfig
from .text2mel import SynthesisState, attend, audio_decoder, audio_encoder, text_encoder

log = logging.getLogger(__name__)

END_ID = 1
PAD_ID = 0


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    mels: np.ndarray          # (batch, n_mels, frames); rows valid up to lengths[i]
    attention: np.ndarray     # (batch, N, frames)
    lengths: np.ndarray
    positions: np.ndarray     # (batch, frames) attended text index per frame
    max_frames_reached: np.ndarray

    def row(self, i: int) -> np.ndarray:
        return self.mels[i, :, :self.lengths[i]]


def synthesize_mels(ids, params: ParameterSet, cfg: ModelConfig) -> SynthesisResult:
    """Generate coarse mels for one utterance (N,) or a padded batch (batch, N).

    Each step re-runs the causal encoder/decoder on the whole prefix and
    keeps the newest frame. A row stops once attention has stayed on its END
    token for `cfg.stop_dwell` consecutive frames, or at `cfg.max_frames`.
    """
    ids = np.atleast_2d(np.asarray(ids, dtype=np.int64))
    batch, n = ids.shape
    key_mask = ids != PAD_ID
    end_pos = np.array([np.flatnonzero(row == END_ID)[0] if (row == END_ID).any() else key_mask[i].sum() - 1
                        for i, row in enumerate(ids)])
    dtype = params["audioenc.c0.w"].dtype
    state = SynthesisState(batch)
    frames = np.zeros((batch, cfg.n_mels, 1), dtype=dtype)
    positions = []
    a = None
    with no_grad():
        keys, values = text_encoder(ids, params, cfg)
        while state.frames < cfg.max_frames and not state.stopped.all():
            q = audio_encoder(frames, params, cfg)
            a, r = attend(keys, values, q, key_mask=key_mask, monotonic=True, state=state, cfg=cfg)
            _, mel = audio_decoder(r, q, params, cfg)
            frames = np.concatenate([frames, mel.data[:, :, -1:]], axis=2)
            state.frames += 1
            positions.append(state.position.copy())
            live = ~state.stopped
            state.lengths[live] = state.frames
            on_end = state.position == end_pos
            state.dwell = np.where(on_end, state.dwell + 1, 0)
            state.stopped |= state.dwell >= cfg.stop_dwell
    reached = ~state.stopped
    if reached.any():
        log.warning("max_frames=%d reached for %d of %d rows", cfg.max_frames, int(reached.sum()), batch)
    return SynthesisResult(frames[:, :, 1:], a.data, state.lengths.copy(), np.stack(positions, axis=1), reached)
