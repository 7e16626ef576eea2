from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import ConfigError


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int = 105
    d: int = 64          # hidden width
    e: int = 32          # character embedding width
    c: int = 64          # SSRN width
    n_mels: int = 80
    r: int = 4           # coarse-frame reduction; SSRN upsamples by this factor
    bins: int = 513
    g: float = 0.2       # guided-attention width
    max_frames: int = 200
    stop_dwell: int = 10
    window_back: int = 1
    window_ahead: int = 3

    def __post_init__(self):
        if self.d < 8 or self.e < 8 or self.c < 8:
            raise ConfigError("d, e and c must be at least 8")
        if self.r != 4:
            raise ConfigError("reduction factor is fixed at 4 (two stride-2 upsamplings)")
        if self.g <= 0:
            raise ConfigError("g must be positive")

    def with_vocab(self, vocab_size: int) -> "ModelConfig":
        return replace(self, vocab_size=vocab_size)
