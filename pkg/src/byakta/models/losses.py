from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from ..neural import Tensor, absolute, bce_with_logits, mul, sub, sum_


def guided_attention_mask(n: int, t: int, g: float = 0.2) -> np.ndarray:
    """W[n, t] = 1 - exp(-(n/N - t/T)^2 / (2 g^2)), shape (N, T)."""
    if g <= 0:
        raise ValueError("g must be positive")
    diff = np.arange(n)[:, None] / n - np.arange(t)[None, :] / t
    return 1.0 - np.exp(-(diff**2) / (2.0 * g * g))


def batch_guided_mask(text_lengths, frame_lengths, n: int, t: int, g: float = 0.2):
    """Per-row masks on a padded (batch, n, t) grid plus the validity mask."""
    batch = len(text_lengths)
    w = np.zeros((batch, n, t))
    valid = np.zeros((batch, n, t), dtype=bool)
    for i, (tn, tt) in enumerate(zip(text_lengths, frame_lengths)):
        w[i, :tn, :tt] = guided_attention_mask(int(tn), int(tt), g)
        valid[i, :tn, :tt] = True
    return w, valid


def guided_attention_loss(a: Tensor, w: np.ndarray, valid: np.ndarray | None = None) -> Tensor:
    """Mean of A * W over all (valid) cells."""
    w = np.asarray(w, dtype=a.dtype)
    if w.shape != a.shape[-w.ndim:] and w.shape != a.shape:
        raise ShapeMismatch(f"mask {w.shape} does not fit attention {a.shape}")
    if valid is None:
        return mul(sum_(mul(a, w)), 1.0 / a.data.size)
    weights = (w * valid).astype(a.dtype)
    return mul(sum_(mul(a, weights)), 1.0 / max(int(valid.sum()), 1))


def spectrogram_loss(pred: Tensor, logits: Tensor, target, frame_mask: np.ndarray | None = None):
    """L1 + binary cross-entropy. Returns (total, l1, bce).

    `frame_mask` (batch, T) restricts both terms to real frames.
    """
    target = np.asarray(target, dtype=pred.dtype)
    if pred.shape != target.shape or logits.shape != target.shape:
        raise ShapeMismatch(f"prediction {pred.shape} vs target {target.shape}")
    if frame_mask is None:
        weights = np.ones(target.shape, dtype=pred.dtype)
    else:
        weights = np.broadcast_to(np.asarray(frame_mask, dtype=pred.dtype)[:, None, :], target.shape)
    l1 = mul(sum_(mul(absolute(sub(pred, target)), weights)), 1.0 / float(weights.sum()))
    bce = bce_with_logits(logits, target, weights)
    return l1 + bce, l1, bce
