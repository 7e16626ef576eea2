"""Seeded toy experiments: overfitting and English-to-Bangla style transfer."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..neural import OptimizerState, ParameterSet, no_grad
from .config import ModelConfig
from .ssrn import init_ssrn
from .text2mel import init_text2mel
from .toy import ToyCorpus, bangla_corpus, latin_corpus, latin_vocab
from .train import Text2MelBatch, ssrn_loss, text2mel_loss, train_step_ssrn, train_step_text2mel
from .transfer import transfer_init

log = logging.getLogger(__name__)

TOY_LR = 2e-3


def attention_diagonality(a: np.ndarray, text_lengths, frame_lengths, band: float = 0.2) -> float:
    """Mean fraction of attention mass within |n/N - t/T| < band."""
    fractions = []
    for row, tn, tt in zip(a, text_lengths, frame_lengths):
        tn, tt = int(tn), int(tt)
        diff = np.abs(np.arange(tn)[:, None] / tn - np.arange(tt)[None, :] / tt)
        block = row[:tn, :tt]
        fractions.append(float((block * (diff < band)).sum() / block.sum()))
    return float(np.mean(fractions))


@dataclass
class TrainRun:
    params: ParameterSet
    history: list = field(default_factory=list)   # total loss per step
    final_total: float = float("nan")
    diagonality: float = float("nan")


def evaluate_text2mel(batch: Text2MelBatch, params: ParameterSet, cfg: ModelConfig) -> tuple[float, float]:
    with no_grad():
        total, _, a = text2mel_loss(batch, params, cfg)
    return float(total.data), attention_diagonality(a.data, batch.text_lengths, batch.frame_lengths)


def train_text2mel(corpus: ToyCorpus, cfg: ModelConfig, steps: int, lr: float = TOY_LR, seed: int = 0,
                   params: ParameterSet | None = None, target: float | None = None,
                   log_every: int = 100) -> TrainRun:
    """Train on the whole corpus as one batch. Stops early once the total
    loss drops below `target`, if given."""
    cfg = cfg.with_vocab(len(corpus.vocab))
    params = params if params is not None else init_text2mel(cfg, seed)
    batch = corpus.text2mel_batch()
    opt = OptimizerState(lr=lr)
    run = TrainRun(params)
    for step in range(steps):
        losses = train_step_text2mel(batch, params, opt, cfg)
        run.history.append(losses.total)
        if log_every and step % log_every == 0:
            log.info("text2mel step %d: l1=%.4f bce=%.4f att=%.4f", step, losses.l1, losses.bce, losses.attention)
        if target is not None and losses.total < target:
            break
    run.final_total, run.diagonality = evaluate_text2mel(batch, params, cfg)
    return run


def train_ssrn(corpus: ToyCorpus, cfg: ModelConfig, steps: int, lr: float = TOY_LR, seed: int = 1,
               params: ParameterSet | None = None, log_every: int = 50) -> TrainRun:
    params = params if params is not None else init_ssrn(cfg, seed)
    batch = corpus.ssrn_batch(cfg.bins)
    opt = OptimizerState(lr=lr)
    run = TrainRun(params)
    for step in range(steps):
        run.history.append(train_step_ssrn(batch, params, opt, cfg))
        if log_every and step % log_every == 0:
            log.info("ssrn step %d: loss=%.4f", step, run.history[-1])
    with no_grad():
        run.final_total = float(ssrn_loss(batch, params, cfg)[0].data)
    return run


@dataclass(frozen=True)
class TransferResult:
    transferred: float
    scratch: float
    pretrain: float


def transfer_experiment(cfg: ModelConfig | None = None, pretrain_steps: int = 400, finetune_steps: int = 200,
                        seed: int = 0, lr: float = TOY_LR) -> TransferResult:
    """Pretrain on a Latin-letter toy language, move to a Bangla toy language
    and compare fine-tuning against training from scratch for equal steps."""
    cfg = cfg or ModelConfig()
    source = latin_corpus(seed)
    target = bangla_corpus(seed + 1)
    pre = train_text2mel(source, cfg, pretrain_steps, lr, seed)
    moved = transfer_init(pre.params, source.vocab, target.vocab, cfg.with_vocab(len(target.vocab)), seed)
    tuned = train_text2mel(target, cfg, finetune_steps, lr, seed, params=moved)
    scratch = train_text2mel(target, cfg, finetune_steps, lr, seed)
    return TransferResult(tuned.final_total, scratch.final_total, pre.final_total)


@dataclass(frozen=True)
class ToyCheckpoint:
    text2mel: ParameterSet
    ssrn: ParameterSet
    text2mel_loss: float
    diagonality: float
    ssrn_start: float
    ssrn_loss: float

    def combined(self, text2mel_prefix: str = "text2mel/", ssrn_prefix: str = "ssrn/") -> ParameterSet:
        out = self.text2mel.with_prefix(text2mel_prefix)
        out.update(self.ssrn.with_prefix(ssrn_prefix))
        return out


def train_toy(steps: int = 2000, ssrn_steps: int = 200, seed: int = 0, cfg: ModelConfig | None = None,
              lr: float = TOY_LR) -> ToyCheckpoint:
    """The overfit experiment on the four-utterance Bangla toy corpus."""
    cfg = cfg or ModelConfig()
    corpus = bangla_corpus(seed)
    t2m = train_text2mel(corpus, cfg, steps, lr, seed)
    sr = train_ssrn(corpus, cfg.with_vocab(len(corpus.vocab)), ssrn_steps, lr, seed + 1)
    return ToyCheckpoint(t2m.params, sr.params, t2m.final_total, t2m.diagonality,
                         sr.history[0] if sr.history else sr.final_total, sr.final_total)
