"""End-to-end text to WAV synthesis, weights files, configs and benchmarks."""

from __future__ import annotations

import logging
import os
import struct
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .dsp import AudioClip, StftConfig, decompress, deemphasis, encode_wav, griffin_lim
from .errors import BadMagic, ConfigError, CorruptPayload, EmptyList, VersionUnsupported
from .models.config import ModelConfig
from .models.ssrn import init_ssrn, ssrn
from .models.synth import synthesize_mels
from .models.text2mel import init_text2mel
from .neural import ParameterSet, Tensor, no_grad
from .segmentation import (BREAK_GAP_MS, DEFAULT_CROSSFADE_MS, Break, MergePlan, enqueue_batches, merge_audio,
                           split_text)
from .text import NumeralLexicon, Vocabulary, normalize_text

log = logging.getLogger(__name__)

CONFIG_ENV = "BYAKTA_CONFIG"
TEXT2MEL_PREFIX = "text2mel/"
SSRN_PREFIX = "ssrn/"
OUTPUT_PEAK = 0.95

# ---------------------------------------------------------------- weights

WEIGHTS_MAGIC = b"BYKW"
WEIGHTS_VERSION = 1


def encode_weights(params: ParameterSet) -> bytes:
    out = [WEIGHTS_MAGIC, struct.pack("<II", WEIGHTS_VERSION, len(params))]
    for name, p in params.items():
        raw = name.encode("utf-8")
        data = np.asarray(p.data, dtype="<f4", order="C")  # ascontiguousarray would promote 0-d to 1-d
        out.append(struct.pack("<H", len(raw)) + raw)
        out.append(struct.pack("<B", data.ndim) + struct.pack(f"<{data.ndim}I", *data.shape))
        out.append(data.tobytes())
    return b"".join(out)


def decode_weights(blob: bytes) -> ParameterSet:
    if blob[:4] != WEIGHTS_MAGIC:
        raise BadMagic(f"expected {WEIGHTS_MAGIC!r}, got {blob[:4]!r}")
    pos = 4

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(blob):
            raise CorruptPayload(f"weights file truncated at byte {pos} (need {n} more)")
        chunk = blob[pos:pos + n]
        pos += n
        return chunk

    version, count = struct.unpack("<II", take(8))
    if version != WEIGHTS_VERSION:
        raise VersionUnsupported(f"weights version {version}")
    params = ParameterSet()
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        try:
            name = take(name_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptPayload("tensor name is not UTF-8") from exc
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim))
        size = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(take(4 * size), dtype="<f4").reshape(shape).astype(np.float32)
        params[name] = Tensor(data, requires_grad=True)
    if pos != len(blob):
        raise CorruptPayload(f"{len(blob) - pos} trailing bytes after {count} tensors")
    return params


def save_weights(params: ParameterSet, path: str | Path) -> None:
    Path(path).write_bytes(encode_weights(params))


def load_weights(path: str | Path) -> ParameterSet:
    return decode_weights(Path(path).read_bytes())


# ----------------------------------------------------------------- config

_STFT_KEYS = {"sample_rate", "n_fft", "hop", "win"}
_MODEL_KEYS = {"d", "e", "c", "n_mels", "g", "max_frames", "stop_dwell", "window_back", "window_ahead"}
_PATH_KEYS = {"vocab", "lexicon", "text2mel_weights", "ssrn_weights"}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything `synthesize` needs. Paths left as None fall back to the
    packaged vocabulary and lexicon, and to seeded random weights."""

    stft: StftConfig = field(default_factory=StftConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    max_segment_tokens: int = 120
    batch_size: int = 4
    sentence_gap_ms: float = BREAK_GAP_MS[Break.SENTENCE]
    clause_gap_ms: float = BREAK_GAP_MS[Break.CLAUSE]
    cut_gap_ms: float = BREAK_GAP_MS[Break.NONE]
    crossfade_ms: float = DEFAULT_CROSSFADE_MS
    gl_iterations: int = 60
    sharpen_power: float = 1.3
    vocab: Path | None = None
    lexicon: Path | None = None
    text2mel_weights: Path | None = None
    ssrn_weights: Path | None = None
    seed: int = 0

    def __post_init__(self):
        if not 8 <= self.max_segment_tokens <= 10_000:
            raise ConfigError("max_segment_tokens must lie in [8, 10000]")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if min(self.sentence_gap_ms, self.clause_gap_ms, self.cut_gap_ms, self.crossfade_ms) < 0:
            raise ConfigError("gaps and crossfade must be non-negative")
        if self.gl_iterations < 0:
            raise ConfigError("gl_iterations must be >= 0")
        if self.sharpen_power <= 0:
            raise ConfigError("sharpen_power must be positive")
        if self.model.bins != self.stft.bins:
            raise ConfigError(f"model bins {self.model.bins} != STFT bins {self.stft.bins}")
        for key in _PATH_KEYS:
            path = getattr(self, key)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{key}: no such file {path}")

    @property
    def gaps(self) -> dict:
        return {Break.SENTENCE: self.sentence_gap_ms, Break.CLAUSE: self.clause_gap_ms,
                Break.NONE: self.cut_gap_ms}

    def updated(self, **overrides) -> "PipelineConfig":
        """Apply flat key=value overrides (same keys as the config file)."""
        return _build(self, overrides, Path.cwd())

    @classmethod
    def parse(cls, text: str, base_dir: Path | None = None) -> "PipelineConfig":
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"line {lineno}: expected key = value")
            values[key.strip()] = value.strip()
        return _build(cls(), values, base_dir or Path.cwd())

    @classmethod
    def load(cls, path: str | Path | None = None) -> "PipelineConfig":
        """Read `path`, else the file named by $BYAKTA_CONFIG, else defaults."""
        path = path or os.environ.get(CONFIG_ENV)
        if not path:
            return cls()
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.parse(text, path.parent)

    def dump(self) -> str:
        lines = [f"{k} = {getattr(self.stft, k)}" for k in sorted(_STFT_KEYS)]
        lines += [f"{k} = {getattr(self.model, k)}" for k in sorted(_MODEL_KEYS)]
        for f in fields(self):
            if f.name in ("stft", "model"):
                continue
            value = getattr(self, f.name)
            if value is not None:
                lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _convert(key: str, raw, kind):
    try:
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.__name__}") from exc


def _build(base: PipelineConfig, values: dict, base_dir: Path) -> PipelineConfig:
    stft_kw, model_kw, top_kw = {}, {}, {}
    top_types = {f.name: f.type for f in fields(PipelineConfig)}
    for key, raw in values.items():
        if key in _STFT_KEYS:
            stft_kw[key] = _convert(key, raw, int)
        elif key in _MODEL_KEYS:
            model_kw[key] = _convert(key, raw, float if key == "g" else int)
        elif key in _PATH_KEYS:
            path = Path(raw) if not isinstance(raw, Path) else raw
            top_kw[key] = path if path.is_absolute() else base_dir / path
        elif key in top_types:
            kind = {"int": int, "float": float}[top_types[key]]
            top_kw[key] = _convert(key, raw, kind)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        stft = replace(base.stft, **stft_kw)
        model = replace(base.model, bins=stft.bins, **model_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return replace(base, stft=stft, model=model, **top_kw)


# -------------------------------------------------------------- synthesis

@dataclass(frozen=True)
class SynthesisReport:
    segments: int
    frames: tuple[int, ...]           # coarse frames per segment
    segment_samples: tuple[int, ...]  # vocoded samples per segment
    gap_samples: tuple[int, ...]      # silence after each boundary
    crossfade_samples: int
    dropped: int                      # out-of-vocabulary symbols removed by normalization
    max_frames_reached: int           # segments that hit the frame limit

    @property
    def planned_samples(self) -> int:
        k = self.segments
        return sum(self.segment_samples) + sum(self.gap_samples) - (k - 1) * self.crossfade_samples


class Synthesizer:
    """Loaded vocabulary, lexicon and both networks for one config."""

    def __init__(self, cfg: PipelineConfig | None = None):
        cfg = cfg or PipelineConfig()
        self.vocab = Vocabulary.from_file(cfg.vocab) if cfg.vocab else Vocabulary.default()
        self.lexicon = NumeralLexicon.from_file(cfg.lexicon) if cfg.lexicon else NumeralLexicon.default()
        self.cfg = replace(cfg, model=cfg.model.with_vocab(len(self.vocab)))
        self.text2mel = self._load(cfg.text2mel_weights, TEXT2MEL_PREFIX, init_text2mel(self.cfg.model, cfg.seed))
        self.ssrn = self._load(cfg.ssrn_weights, SSRN_PREFIX, init_ssrn(self.cfg.model, cfg.seed + 1))

    @staticmethod
    def _load(path, prefix: str, fresh: ParameterSet) -> ParameterSet:
        if path is None:
            log.info("no %sweights configured; using seeded random initialization", prefix)
            return fresh
        stored = load_weights(path)
        params = stored.strip_prefix(prefix) if any(k.startswith(prefix) for k in stored) else stored
        missing = [k for k in fresh if k not in params]
        if missing:
            raise ConfigError(f"{path}: missing {len(missing)} tensors, e.g. {missing[0]}")
        for name, p in fresh.items():
            if params[name].shape != p.shape:
                raise ConfigError(f"{path}: {name} has shape {params[name].shape}, model expects {p.shape}")
        return ParameterSet((k, params[k]) for k in fresh)

    def vocode(self, coarse: np.ndarray) -> AudioClip:
        """Coarse mel (n_mels, T) -> waveform for one segment."""
        cfg = self.cfg
        with no_grad():
            _, lin = ssrn(coarse[None].astype(np.float32), self.ssrn, cfg.model)
        mag = decompress(lin.data[0].T.astype(np.float64))
        clip = griffin_lim(mag, cfg.gl_iterations, cfg.sharpen_power, cfg.stft)
        x = deemphasis(clip.samples)
        peak = np.max(np.abs(x)) if x.size else 0.0
        if peak > 0:
            x = x * (OUTPUT_PEAK / peak)
        return AudioClip(x, cfg.stft.sample_rate)

    def __call__(self, text: str) -> tuple[AudioClip, SynthesisReport]:
        cfg = self.cfg
        nt = normalize_text(text, self.vocab, self.lexicon)
        segments = split_text(nt, cfg.max_segment_tokens)
        clips: list[AudioClip] = [None] * len(segments)
        frames = [0] * len(segments)
        capped = 0
        for batch in enqueue_batches(segments, cfg.batch_size, self.vocab):
            result = synthesize_mels(batch.padded_ids, self.text2mel, cfg.model)
            capped += int(result.max_frames_reached.sum())
            for row, index in enumerate(batch.indices):
                coarse = result.row(row)
                frames[index] = coarse.shape[1]
                clips[index] = self.vocode(coarse)
        plan = MergePlan.for_segments(segments, cfg.crossfade_ms, cfg.gaps)
        sr = cfg.stft.sample_rate
        audio = merge_audio(clips, plan, sr)
        report = SynthesisReport(
            segments=len(segments),
            frames=tuple(frames),
            segment_samples=tuple(len(c.samples) for c in clips),
            gap_samples=tuple(plan.gap_samples(len(segments) - 1, sr)),
            crossfade_samples=plan.crossfade_samples(sr),
            dropped=nt.dropped,
            max_frames_reached=capped,
        )
        return audio, report


def synthesize(text: str, cfg: PipelineConfig | None = None) -> tuple[AudioClip, SynthesisReport]:
    return Synthesizer(cfg)(text)


# -------------------------------------------------------------- benchmark

@dataclass(frozen=True)
class BenchmarkList:
    sentences: tuple[str, ...]
    source: Path | None = None

    def __len__(self) -> int:
        return len(self.sentences)


def parse_benchmark(text: str, source: Path | None = None) -> BenchmarkList:
    sentences = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            sentences.append(line)
    if not sentences:
        raise EmptyList(f"no sentences in {source or 'benchmark list'}")
    return BenchmarkList(tuple(sentences), source)


def load_benchmark(path: str | Path) -> BenchmarkList:
    path = Path(path)
    return parse_benchmark(path.read_text(encoding="utf-8-sig"), path)


REPORT_NAME = "report.tsv"
REPORT_COLUMNS = ("index", "wav", "samples", "duration_s", "segments", "wall_s", "status", "error")


@dataclass(frozen=True)
class BenchmarkRow:
    index: int
    wav: str
    samples: int
    duration_s: float
    segments: int
    wall_s: float
    status: str
    error: str = ""

    def tsv(self) -> str:
        error = self.error.replace("\t", " ").replace("\n", " ")
        return "\t".join([str(self.index), self.wav, str(self.samples), f"{self.duration_s:.6f}",
                          str(self.segments), f"{self.wall_s:.3f}", self.status, error])


def run_benchmark(bench: BenchmarkList | Sequence[str], cfg: PipelineConfig | None, out_dir: str | Path,
                  synthesizer: Synthesizer | None = None) -> list[BenchmarkRow]:
    """Write 0001.wav, 0002.wav, ... and report.tsv into `out_dir`.

    A sentence that fails is recorded with its error and skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sentences = bench.sentences if isinstance(bench, BenchmarkList) else tuple(bench)
    synth = synthesizer or Synthesizer(cfg)
    sr = synth.cfg.stft.sample_rate
    rows = []
    for i, sentence in enumerate(sentences, 1):
        name = f"{i:04d}.wav"
        start = time.perf_counter()
        try:
            audio, report = synth(sentence)
            (out_dir / name).write_bytes(encode_wav(audio))
            n = len(audio.samples)
            rows.append(BenchmarkRow(i, name, n, n / sr, report.segments, time.perf_counter() - start, "ok"))
        except Exception as exc:  # one bad sentence must not stop the run
            log.warning("sentence %d failed: %s", i, exc)
            rows.append(BenchmarkRow(i, "", 0, 0.0, 0, time.perf_counter() - start, "error",
                                     f"{type(exc).__name__}: {exc}"))
    lines = ["\t".join(REPORT_COLUMNS)] + [r.tsv() for r in rows]
    (out_dir / REPORT_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rows
