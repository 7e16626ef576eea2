"""Vocabulary-remapping weight transfer between languages."""

from __future__ import annotations

import numpy as np

from ..errors import MissingParameter, ShapeMismatch
from ..neural import ParameterSet, Tensor, fan_in_uniform
from ..text.vocab import Vocabulary
from .config import ModelConfig
from .text2mel import EMBED, init_text2mel


def transfer_init(pretrained: ParameterSet, old_vocab: Vocabulary, new_vocab: Vocabulary,
                  cfg: ModelConfig | None = None, seed: int = 0) -> ParameterSet:
    """Carry a trained Text2Mel over to a new symbol set.

    Non-embedding tensors are copied as they are. Embedding rows are copied
    for symbols both vocabularies share; rows for new symbols are drawn fresh.
    When `cfg` is given the result is validated against a freshly built model.
    """
    if EMBED not in pretrained:
        raise MissingParameter(EMBED)
    table = pretrained[EMBED].data
    if table.shape[0] != len(old_vocab):
        raise ShapeMismatch(f"embedding has {table.shape[0]} rows, old vocabulary {len(old_vocab)} symbols")
    rng = np.random.default_rng(seed)
    e = table.shape[1]
    fresh = fan_in_uniform(rng, (len(new_vocab), e), e, dtype=table.dtype)
    for i, sym in enumerate(new_vocab.symbols):
        j = old_vocab.index.get(sym)
        if j is not None:
            fresh[i] = table[j]

    if cfg is not None:
        reference = init_text2mel(cfg.with_vocab(len(new_vocab)))
        for name, p in reference.items():
            if name == EMBED:
                continue
            if name not in pretrained:
                raise MissingParameter(name)
            if pretrained[name].shape != p.shape:
                raise ShapeMismatch(f"{name}: {pretrained[name].shape} vs expected {p.shape}")

    out = ParameterSet()
    for name, p in pretrained.items():
        out[name] = Tensor(fresh if name == EMBED else p.data.copy(), requires_grad=True)
    return out
