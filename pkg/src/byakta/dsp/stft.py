"""Short-time Fourier transform and its least-squares inverse."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AudioTooShort, ConfigError, ShapeMismatch
from .audio import AudioClip


@dataclass(frozen=True)
class StftConfig:
    sample_rate: int = 22050
    n_fft: int = 1024
    hop: int = 256
    win: int = 1024

    def __post_init__(self):
        if self.n_fft <= 0 or self.n_fft & (self.n_fft - 1):
            raise ConfigError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 0 < self.hop <= self.win <= self.n_fft:
            raise ConfigError("need 0 < hop <= win <= n_fft")
        if self.win % self.hop or self.win // self.hop < 2:
            raise ConfigError("hop must divide win with at least 50% overlap")

    @property
    def bins(self) -> int:
        return self.n_fft // 2 + 1

    @property
    def pad(self) -> int:
        return self.n_fft // 2

    def window(self) -> np.ndarray:
        """Periodic Hann window of length `win`, centred in an n_fft frame."""
        n = np.arange(self.win)
        w = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / self.win)
        left = (self.n_fft - self.win) // 2
        out = np.zeros(self.n_fft)
        out[left:left + self.win] = w
        return out

    def num_frames(self, length: int) -> int:
        return 1 + length // self.hop


def _samples(audio) -> np.ndarray:
    if isinstance(audio, AudioClip):
        return audio.samples
    return np.asarray(audio, dtype=np.float64)


def stft(audio, cfg: StftConfig) -> np.ndarray:
    """Complex spectrogram, shape (frames, bins), with reflection padding.

    The signal is reflect-padded by n_fft/2 on both ends, so a signal of
    length L yields 1 + L // hop frames.
    """
    x = _samples(audio)
    if len(x) < cfg.win or len(x) <= cfg.pad:
        raise AudioTooShort(f"need at least {max(cfg.win, cfg.pad + 1)} samples, got {len(x)}")
    padded = np.pad(x, cfg.pad, mode="reflect")
    n_frames = cfg.num_frames(len(x))
    frames = np.lib.stride_tricks.sliding_window_view(padded, cfg.n_fft)[::cfg.hop][:n_frames]
    return np.fft.rfft(frames * cfg.window(), axis=-1)


def _reflect_index(i: np.ndarray, length: int) -> np.ndarray:
    """Map padded-signal positions back onto the source sample they copy."""
    j = np.abs(i)
    over = j > length - 1
    j[over] = 2 * (length - 1) - j[over]
    return j


def istft(spec: np.ndarray, cfg: StftConfig, length: int | None = None) -> np.ndarray:
    """Least-squares inverse of `stft` (exact for consistent spectrograms).

    Samples duplicated by the reflection padding are folded back onto their
    source, which keeps this the true pseudo-inverse of the padded analysis.
    """
    spec = np.asarray(spec)
    if spec.ndim != 2 or spec.shape[1] != cfg.bins:
        raise ShapeMismatch(f"expected (frames, {cfg.bins}) spectrogram, got {spec.shape}")
    n_frames = spec.shape[0]
    if length is None:
        length = cfg.hop * (n_frames - 1)
    if cfg.num_frames(length) != n_frames:
        raise ShapeMismatch(f"{n_frames} frames cannot come from {length} samples")
    window = cfg.window()
    frames = np.fft.irfft(spec, n=cfg.n_fft, axis=-1) * window
    pos = cfg.hop * np.arange(n_frames)[:, None] + np.arange(cfg.n_fft)[None, :] - cfg.pad
    src = _reflect_index(pos.ravel(), length)
    num = np.bincount(src, weights=frames.ravel(), minlength=length)
    den = np.bincount(src, weights=np.broadcast_to(window**2, frames.shape).ravel(), minlength=length)
    return num / np.maximum(den, 1e-12)


def magnitude(spec: np.ndarray) -> np.ndarray:
    return np.abs(spec)
