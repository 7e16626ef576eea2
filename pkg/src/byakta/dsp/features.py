"""Mel filterbank, dB compression and emphasis filters."""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from .stft import StftConfig, stft

REF_DB = 20.0
MAX_DB = 100.0
MAG_FLOOR = 1e-5
PREEMPHASIS = 0.97


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_band_edges(cfg: StftConfig, n_mels: int) -> np.ndarray:
    """n_mels + 2 frequencies (Hz): lower edge, centres, upper edge."""
    return mel_to_hz(np.linspace(0.0, hz_to_mel(cfg.sample_rate / 2), n_mels + 2))


def mel_filterbank(cfg: StftConfig, n_mels: int = 80) -> np.ndarray:
    """Triangular filters (peak 1) on the mel scale, shape (n_mels, bins)."""
    if n_mels < 1:
        raise ValueError("n_mels must be positive")
    edges = mel_band_edges(cfg, n_mels)
    freqs = np.arange(cfg.bins) * cfg.sample_rate / cfg.n_fft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    return np.maximum(0.0, np.minimum(rising, falling))


def linear_to_mel(mag: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """(frames, bins) magnitudes -> (frames, n_mels)."""
    return mag @ fb.T


def compress(mag, ref_db: float = REF_DB, max_db: float = MAX_DB) -> np.ndarray:
    """Magnitude -> normalized dB in [0, 1]."""
    db = 20.0 * np.log10(np.maximum(mag, MAG_FLOOR))
    return np.clip((db - ref_db + max_db) / max_db, 0.0, 1.0)


def decompress(norm, ref_db: float = REF_DB, max_db: float = MAX_DB) -> np.ndarray:
    db = np.clip(norm, 0.0, 1.0) * max_db - max_db + ref_db
    return 10.0 ** (db / 20.0)


def preemphasis(x, coef: float = PREEMPHASIS) -> np.ndarray:
    return lfilter([1.0, -coef], [1.0], np.asarray(x, dtype=np.float64))


def deemphasis(x, coef: float = PREEMPHASIS) -> np.ndarray:
    return lfilter([1.0], [1.0, -coef], np.asarray(x, dtype=np.float64))


def audio_to_features(samples, cfg: StftConfig, n_mels: int = 80, reduction: int = 4):
    """Training targets from a waveform.

    Returns (coarse_mel, linear): coarse_mel has shape (ceil(frames/r), n_mels),
    linear has shape (frames, bins); both normalized to [0, 1].
    """
    mag = np.abs(stft(preemphasis(samples), cfg))
    mel = linear_to_mel(mag, mel_filterbank(cfg, n_mels))
    return compress(mel)[::reduction], compress(mag)
