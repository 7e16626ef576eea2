"""16-bit PCM mono RIFF/WAVE encoding."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import UnsupportedFormat
from .audio import AudioClip

HEADER_SIZE = 44
_SCALE = 32767.0


def encode_wav(clip: AudioClip) -> bytes:
    pcm = np.round(np.clip(clip.samples, -1.0, 1.0) * _SCALE).astype("<i2").tobytes()
    sr = int(clip.sample_rate)
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, sr, sr * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    return header + pcm


def decode_wav(data: bytes) -> AudioClip:
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise UnsupportedFormat("not a RIFF/WAVE file")
    pos = 12
    fmt = None
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise UnsupportedFormat("short fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body)
        elif chunk_id == b"data":
            if fmt is None:
                raise UnsupportedFormat("data chunk before fmt chunk")
            tag, channels, sr, _, _, bits = fmt
            if tag != 1 or channels != 1 or bits != 16:
                raise UnsupportedFormat(f"only PCM16 mono is supported (format={tag}, channels={channels}, bits={bits})")
            if len(body) != size or size % 2:
                raise UnsupportedFormat("truncated data chunk")
            samples = np.frombuffer(body, dtype="<i2").astype(np.float64) / _SCALE
            return AudioClip(samples, sr)
        pos += 8 + size + (size & 1)
    raise UnsupportedFormat("no data chunk")


def write_wav(clip: AudioClip, path: str | Path) -> None:
    Path(path).write_bytes(encode_wav(clip))


def read_wav(path: str | Path) -> AudioClip:
    return decode_wav(Path(path).read_bytes())
