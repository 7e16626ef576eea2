from .config import ModelConfig
from .losses import guided_attention_loss, guided_attention_mask, spectrogram_loss
from .ssrn import init_ssrn, ssrn
from .synth import SynthesisResult, synthesize_mels
from .text2mel import forward_text2mel, init_text2mel
from .transfer import transfer_init

__all__ = [
    "ModelConfig", "SynthesisResult", "forward_text2mel", "guided_attention_loss", "guided_attention_mask",
    "init_ssrn", "init_text2mel", "spectrogram_loss", "ssrn", "synthesize_mels", "transfer_init",
]
