"""Griffin-Lim phase reconstruction from a magnitude spectrogram.

The default starting point is a deterministic phase-vocoder estimate rather
than flat zero phase. Zero phase makes every frame restart a partial at the
same phase, and with 75% overlap that leaves Griffin-Lim stuck well away from
a consistent spectrogram even for a single steady tone. The estimate below
starts the first frame at zero phase and carries every spectral peak forward
at its own frequency, which is what a steady partial does.
"""

from __future__ import annotations

import numpy as np

from .audio import AudioClip
from .stft import StftConfig, istft, stft

PEAK = 0.95
N_ROTATIONS = 8


def spectral_convergence(x: np.ndarray, mag: np.ndarray, cfg: StftConfig) -> float:
    """‖|STFT(x)| - mag‖ / ‖mag‖."""
    return float(np.linalg.norm(np.abs(stft(x, cfg)) - mag) / max(np.linalg.norm(mag), 1e-12))


def _peak_regions(m: np.ndarray):
    """Local maxima of one magnitude frame and the bin range each one owns."""
    inner = (m[1:-1] >= m[:-2]) & (m[1:-1] > m[2:]) & (m[1:-1] > 1e-6 * m.max())
    peaks = np.flatnonzero(inner) + 1
    bounds = [0]
    for p, q in zip(peaks[:-1], peaks[1:]):
        bounds.append(p + int(np.argmin(m[p:q + 1])))
    bounds.append(len(m))
    owner = np.repeat(np.arange(len(peaks)), np.diff(bounds)) if len(peaks) else None
    return peaks, owner


def vocoder_phase(mag: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Phase estimate (frames, bins) in the same convention as `stft`.

    Peak frequencies come from Grandke's two-bin interpolation, which is
    exact for a stationary sinusoid under a Hann window. Bins are locked to
    the phase of the peak that owns them, flipped by pi on the negative Hann
    sidelobes.
    """
    n_frames, n_bins = mag.shape
    k = np.arange(n_bins)
    locked = np.zeros((n_frames, n_bins))
    out = np.zeros((n_frames, n_bins))
    for f in range(n_frames):
        m = mag[f]
        if m.max() <= 0:
            locked[f] = locked[f - 1] if f else 0.0
            out[f] = locked[f]
            continue
        peaks, owner = _peak_regions(m)
        if owner is None:
            locked[f] = locked[f - 1] if f else 0.0
            out[f] = locked[f]
            continue
        left, centre, right = m[peaks - 1], m[peaks], m[peaks + 1]
        offset = np.where(right > left, (2 * right - centre) / (centre + right),
                          -(2 * left - centre) / (left + centre))
        true_bin = peaks + offset
        if f:
            peak_phase = locked[f - 1, peaks] + cfg.hop * 2.0 * np.pi * true_bin / cfg.n_fft
        else:
            peak_phase = np.zeros(len(peaks))
        locked[f] = peak_phase[owner]
        distance = np.abs(k - true_bin[owner])
        negative_lobe = (distance >= 2) & (np.floor(distance) % 2 == 0)
        out[f] = locked[f] + np.pi * negative_lobe
    # Phases above are referenced to the frame centre; `stft` references frame start.
    return out + np.pi * k


def initial_estimate(mag: np.ndarray, cfg: StftConfig, length: int, init: str = "vocoder") -> np.ndarray:
    if init == "zero":
        return istft(mag, cfg, length)
    if init != "vocoder":
        raise ValueError(f"unknown init {init!r}")
    base = vocoder_phase(mag, cfg)
    best, best_sc = None, np.inf
    # The global phase decides how partials meet their mirror images in the
    # reflection padding; take the best of a few fixed rotations.
    for theta in 2.0 * np.pi * np.arange(N_ROTATIONS) / N_ROTATIONS:
        x = istft(mag * np.exp(1j * (base + theta)), cfg, length)
        err = spectral_convergence(x, mag, cfg)
        if err < best_sc:
            best, best_sc = x, err
    return best


def griffin_lim(mag: np.ndarray, iterations: int = 60, sharpen_power: float = 1.3,
                cfg: StftConfig | None = None, *, init: str = "vocoder", length: int | None = None,
                history: list | None = None) -> AudioClip:
    """Reconstruct audio from (frames, bins) magnitudes.

    `mag` is raised to `sharpen_power` first. If `history` is given, the
    spectral convergence of every iterate (initial estimate included) is
    appended to it. The result is peak-normalized to 0.95.
    """
    cfg = cfg or StftConfig()
    mag = np.asarray(mag, dtype=np.float64) ** sharpen_power
    if length is None:
        length = cfg.hop * (mag.shape[0] - 1)
    x = initial_estimate(mag, cfg, length, init)
    if history is not None:
        history.append(spectral_convergence(x, mag, cfg))
    for _ in range(iterations):
        phase = np.angle(stft(x, cfg))
        x = istft(mag * np.exp(1j * phase), cfg, length)
        if history is not None:
            history.append(spectral_convergence(x, mag, cfg))
    peak = np.max(np.abs(x)) if len(x) else 0.0
    if peak > 0:
        x = x * (PEAK / peak)
    return AudioClip(x, cfg.sample_rate)
