"""Raw text -> digit-free, in-vocabulary grapheme tokens."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Sequence

from ..errors import EmptyAfterNormalization
from .numerals import NumeralLexicon, normalize_numerals
from .vocab import END, PAD, Vocabulary

SENTENCE_MARKS = frozenset(".?!")
CLAUSE_MARKS = frozenset(",")
# Symbols that carry no sound of their own.
SILENT = SENTENCE_MARKS | CLAUSE_MARKS | {" "}

_FOLD = str.maketrans({
    "।": ".", "॥": ".", "…": ".",
    ";": ",", ":": ",", "\u2014": ",", "\u2013": ",",
    "؟": "?", "¿": "?", "¡": "!",
})
_SPACES = re.compile(r"\s+")


@dataclass(frozen=True)
class NormalizedText:
    tokens: tuple[str, ...]
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        """Token string without the END marker."""
        return "".join(t for t in self.tokens if t not in (END, PAD))


def _collapse(text: str) -> str:
    return _SPACES.sub(" ", text).strip(" ")


def normalize_text(text: str, vocab: Vocabulary, lexicon: NumeralLexicon) -> NormalizedText:
    text = unicodedata.normalize("NFC", text)
    text = normalize_numerals(text, lexicon)
    text = text.lower().translate(_FOLD)
    text = _collapse(text)
    kept = [c for c in text if c in vocab.index and c not in (PAD, END)]
    dropped = len(text) - len(kept)
    # Dropping joiners can bring combinable marks together, so recompose.
    text = _collapse(unicodedata.normalize("NFC", "".join(kept)))
    tokens = [c for c in text if c in vocab.index]
    dropped += len(text) - len(tokens)
    if all(t in SILENT for t in tokens):
        raise EmptyAfterNormalization(f"nothing speakable left of input {text!r}")
    return NormalizedText(tuple(tokens) + (END,), dropped)


def tokenize(nt: NormalizedText, vocab: Vocabulary) -> list[int]:
    return vocab.encode(nt.tokens)


def detokenize(ids: Sequence[int], vocab: Vocabulary) -> str:
    return "".join(s for s in vocab.decode(ids) if s not in (PAD, END))
