"""Long-utterance handling: split into segments, batch them, merge the audio.

Text is cut at the latest prosodic boundary that keeps a segment within the
token budget, preferring sentence ends over clause ends over word gaps, and
falling back to a hard cut. Each segment is synthesized independently and the
clips are joined with a short silence and a linear crossfade.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dsp.audio import AudioClip
from .errors import CrossfadeLongerThanClip, SampleRateMismatch
from .text.normalize import CLAUSE_MARKS, SENTENCE_MARKS, NormalizedText
from .text.vocab import END, PAD, Vocabulary

DEFAULT_MAX_SEGMENT_TOKENS = 120
DEFAULT_BATCH_SIZE = 4
MIN_SEGMENT_TOKENS = 8


class Break(enum.Enum):
    SENTENCE = "Sentence"
    CLAUSE = "Clause"
    NONE = "None"


# Silence inserted after each kind of boundary, in milliseconds.
BREAK_GAP_MS = {Break.SENTENCE: 200.0, Break.CLAUSE: 80.0, Break.NONE: 40.0}
DEFAULT_CROSSFADE_MS = 10.0


@dataclass(frozen=True)
class Segment:
    index: int
    tokens: tuple[str, ...]  # content tokens followed by END
    trailing_break: Break

    @property
    def content(self) -> tuple[str, ...]:
        return self.tokens[:-1]

    def __len__(self) -> int:
        """Content length; the END marker is not counted against the budget."""
        return len(self.tokens) - 1


def _break_of(token: str) -> Break:
    if token in SENTENCE_MARKS:
        return Break.SENTENCE
    if token in CLAUSE_MARKS:
        return Break.CLAUSE
    return Break.NONE


def _cut_point(tokens: Sequence[str], limit: int) -> int:
    """Number of tokens to take for the next segment (1..limit)."""
    window = tokens[:limit]
    for marks in (SENTENCE_MARKS, CLAUSE_MARKS, frozenset(" ")):
        for i in range(len(window) - 1, -1, -1):
            if window[i] in marks:
                return i + 1
    return limit


def split_text(nt: NormalizedText, max_segment_tokens: int = DEFAULT_MAX_SEGMENT_TOKENS) -> list[Segment]:
    if max_segment_tokens < MIN_SEGMENT_TOKENS:
        raise ValueError(f"max_segment_tokens must be >= {MIN_SEGMENT_TOKENS}")
    tokens = list(nt.tokens)
    if tokens and tokens[-1] == END:
        tokens.pop()
    segments: list[Segment] = []
    pos = 0
    while pos < len(tokens):
        rest = tokens[pos:]
        take = len(rest) if len(rest) <= max_segment_tokens else _cut_point(rest, max_segment_tokens)
        chunk = tuple(rest[:take])
        segments.append(Segment(len(segments), chunk + (END,), _break_of(chunk[-1])))
        pos += take
    return segments


@dataclass(frozen=True, eq=False)
class GenerationBatch:
    segments: tuple[Segment, ...]
    padded_ids: np.ndarray  # (batch, Lmax) int64, PAD-filled

    @property
    def indices(self) -> list[int]:
        return [s.index for s in self.segments]


def pad_batch(segments: Sequence[Segment], vocab: Vocabulary) -> np.ndarray:
    width = max(len(s.tokens) for s in segments)
    ids = np.full((len(segments), width), vocab.index[PAD], dtype=np.int64)
    for row, seg in enumerate(segments):
        ids[row, :len(seg.tokens)] = vocab.encode(seg.tokens)
    return ids


def enqueue_batches(segments: Sequence[Segment], batch_size: int = DEFAULT_BATCH_SIZE,
                    vocab: Vocabulary | None = None) -> list[GenerationBatch]:
    """FIFO batching in segment order."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    vocab = vocab or Vocabulary.default()
    batches = []
    for start in range(0, len(segments), batch_size):
        group = tuple(segments[start:start + batch_size])
        batches.append(GenerationBatch(group, pad_batch(group, vocab)))
    return batches


@dataclass(frozen=True)
class MergePlan:
    """Silence after each boundary and a crossfade length, in milliseconds.

    `gap_ms` is either one value used at every boundary or one value per
    boundary.
    """

    gap_ms: float | tuple[float, ...] = 0.0
    crossfade_ms: float = 0.0

    def __post_init__(self):
        gaps = self.gap_ms if isinstance(self.gap_ms, tuple) else (self.gap_ms,)
        if any(g < 0 for g in gaps) or self.crossfade_ms < 0:
            raise ValueError("gap and crossfade must be non-negative")

    @classmethod
    def for_segments(cls, segments: Sequence[Segment], crossfade_ms: float = DEFAULT_CROSSFADE_MS,
                     gaps: dict | None = None) -> "MergePlan":
        gaps = gaps or BREAK_GAP_MS
        return cls(tuple(gaps[s.trailing_break] for s in segments[:-1]), crossfade_ms)

    def gap_samples(self, boundaries: int, sample_rate: int) -> list[int]:
        if isinstance(self.gap_ms, tuple):
            if len(self.gap_ms) != boundaries:
                raise ValueError(f"plan has {len(self.gap_ms)} gaps for {boundaries} boundaries")
            return [ms_to_samples(g, sample_rate) for g in self.gap_ms]
        return [ms_to_samples(self.gap_ms, sample_rate)] * boundaries

    def crossfade_samples(self, sample_rate: int) -> int:
        return ms_to_samples(self.crossfade_ms, sample_rate)


def ms_to_samples(ms: float, sample_rate: int) -> int:
    return int(round(ms * sample_rate / 1000.0))


def merged_length(lengths: Sequence[int], plan: MergePlan, sample_rate: int) -> int:
    k = len(lengths)
    if k == 0:
        return 0
    return sum(lengths) + sum(plan.gap_samples(k - 1, sample_rate)) - (k - 1) * plan.crossfade_samples(sample_rate)


def merge_audio(clips: Sequence[AudioClip], plan: MergePlan, sample_rate: int) -> AudioClip:
    """Join clips in order: silence gap, then a linear crossfade into the next piece."""
    if not clips:
        raise ValueError("nothing to merge")
    for c in clips:
        if c.sample_rate != sample_rate:
            raise SampleRateMismatch(f"clip at {c.sample_rate} Hz, expected {sample_rate} Hz")
    if len(clips) == 1:
        return AudioClip(clips[0].samples.copy(), sample_rate)
    gaps = plan.gap_samples(len(clips) - 1, sample_rate)
    fade = plan.crossfade_samples(sample_rate)
    for a, b in zip(clips[:-1], clips[1:]):
        if fade > min(len(a), len(b)):
            raise CrossfadeLongerThanClip(f"crossfade of {fade} samples exceeds a clip of {min(len(a), len(b))}")

    out = np.empty(merged_length([len(c) for c in clips], plan, sample_rate))
    first = clips[0].samples
    out[:len(first)] = first
    end = len(first)
    if fade:
        ramp = np.arange(1, fade + 1) / (fade + 1)
    for clip, gap in zip(clips[1:], gaps):
        piece = np.concatenate([np.zeros(gap), clip.samples])
        start = end - fade
        if fade:
            out[start:end] = out[start:end] * (1.0 - ramp) + piece[:fade] * ramp
        out[end:start + len(piece)] = piece[fade:]
        end = start + len(piece)
    assert end == len(out)
    return AudioClip(out, sample_rate)
