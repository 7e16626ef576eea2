from .audio import AudioClip
from .features import (audio_to_features, compress, decompress, deemphasis, linear_to_mel, mel_filterbank,
                       preemphasis)
from .griffin_lim import griffin_lim, spectral_convergence
from .stft import StftConfig, istft, stft
from .wav import decode_wav, encode_wav, read_wav, write_wav

__all__ = [
    "AudioClip", "StftConfig", "audio_to_features", "compress", "decode_wav", "decompress", "deemphasis",
    "encode_wav", "griffin_lim", "istft", "linear_to_mel", "mel_filterbank", "preemphasis", "read_wav",
    "spectral_convergence", "stft", "write_wav",
]
