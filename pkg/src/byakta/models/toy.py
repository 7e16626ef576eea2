"""Synthetic "languages" and tone spectrograms for desk-scale experiments.

Every symbol owns a steady tone: a fundamental and one overtone, each a
three-bin bump on the mel axis. Spaces, punctuation and END are silent.
An utterance holds each symbol for a fixed number of coarse frames, so the
ideal alignment is exactly diagonal.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from ..text.vocab import END, Vocabulary
from .train import SsrnBatch, Text2MelBatch

FRAMES_PER_SYMBOL = 3
_BUMP = np.array([0.5, 1.0, 0.5])


def _tone_bins(symbol: str, n_bins: int, lo: int, span: int) -> tuple[int, int]:
    h = zlib.crc32(symbol.encode("utf-8"))
    fundamental = lo + h % span
    overtone = min(fundamental + 7 + (h >> 8) % 9, n_bins - 2)
    return fundamental, overtone


def _bumps(n_bins: int, centres) -> np.ndarray:
    col = np.zeros(n_bins)
    for c in centres:
        col[c - 1:c + 2] = np.maximum(col[c - 1:c + 2], _BUMP)
    return col


def symbol_frame(symbol: str, n_mels: int = 80) -> np.ndarray:
    if symbol == END or not symbol.strip() or not symbol.isalpha() and not _is_mark(symbol):
        return np.zeros(n_mels)
    return _bumps(n_mels, _tone_bins(symbol, n_mels, 4, n_mels - 24))


def _is_mark(symbol: str) -> bool:
    import unicodedata
    return unicodedata.category(symbol).startswith("M")


def utterance_mel(tokens, n_mels: int = 80, frames_per_symbol: int = FRAMES_PER_SYMBOL) -> np.ndarray:
    """Coarse mel (n_mels, len(tokens) * frames_per_symbol)."""
    cols = [symbol_frame(t, n_mels) for t in tokens]
    return np.repeat(np.stack(cols, axis=1), frames_per_symbol, axis=1).astype(np.float32)


def utterance_linear(coarse: np.ndarray, bins: int = 513, r: int = 4) -> np.ndarray:
    """Full-resolution counterpart of a toy coarse mel: (bins, r * T).

    Each mel bump maps to a bump at the proportional linear bin.
    """
    n_mels, t = coarse.shape
    lin = np.zeros((bins, t))
    scale = (bins - 3) / (n_mels - 1)
    for m in range(n_mels):
        k = 1 + int(round(m * scale))
        lin[k] = np.maximum(lin[k], coarse[m])
    smooth = lin.copy()
    smooth[1:] = np.maximum(smooth[1:], 0.5 * lin[:-1])
    smooth[:-1] = np.maximum(smooth[:-1], 0.5 * lin[1:])
    return np.repeat(smooth, r, axis=1).astype(np.float32)


def latin_vocab(vocab: Vocabulary | None = None) -> Vocabulary:
    """Source language for transfer: Latin letters, space and punctuation."""
    vocab = vocab or Vocabulary.default()
    return vocab.subset(lambda s: not ("ঀ" <= s <= "৿"))


BANGLA_LETTERS = "কখগঘচছজঝটঠডঢণতথদধনপফবভমযরলশষসহঅআইউএও"
LATIN_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class ToyCorpus:
    vocab: Vocabulary
    texts: tuple[str, ...]

    def pairs(self):
        out = []
        for text in self.texts:
            tokens = list(text) + [END]
            out.append((self.vocab.encode(tokens), utterance_mel(tokens)))
        return out

    def text2mel_batch(self) -> Text2MelBatch:
        return Text2MelBatch.from_pairs(self.pairs())

    def ssrn_batch(self, bins: int = 513) -> SsrnBatch:
        return SsrnBatch.from_pairs([(mel, utterance_linear(mel, bins)) for _, mel in self.pairs()])


def make_corpus(letters: str, vocab: Vocabulary, count: int = 4, seed: int = 0,
                min_len: int = 5, max_len: int = 8) -> ToyCorpus:
    rng = np.random.default_rng(seed)
    texts = []
    for _ in range(count):
        n = int(rng.integers(min_len, max_len + 1))
        word = "".join(rng.choice(list(letters), size=n))
        texts.append(word)
    return ToyCorpus(vocab, tuple(texts))


def bangla_corpus(seed: int = 0, count: int = 4, vocab: Vocabulary | None = None) -> ToyCorpus:
    return make_corpus(BANGLA_LETTERS, vocab or Vocabulary.default(), count, seed)


def latin_corpus(seed: int = 0, count: int = 4, vocab: Vocabulary | None = None) -> ToyCorpus:
    return make_corpus(LATIN_LETTERS, vocab or latin_vocab(), count, seed)
