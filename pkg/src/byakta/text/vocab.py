"""Grapheme vocabulary: symbol <-> integer id."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import IdOutOfRange, UnknownSymbol

PAD = "<PAD>"
END = "<END>"


class Vocabulary:
    """Ordered, immutable symbol table. PAD is id 0 and END is id 1."""

    def __init__(self, symbols: Iterable[str]):
        self.symbols: tuple[str, ...] = tuple(symbols)
        if self.symbols[:2] != (PAD, END):
            raise ValueError("vocabulary must start with <PAD>, <END>")
        self.index = {s: i for i, s in enumerate(self.symbols)}
        if len(self.index) != len(self.symbols):
            raise ValueError("duplicate symbols in vocabulary")

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def end_id(self) -> int:
        return 1

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"Vocabulary({len(self)} symbols)"

    @classmethod
    def parse(cls, text: str) -> "Vocabulary":
        # Only the newline is stripped: the space symbol is a line holding a single space.
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls(line.rstrip("\r") for line in lines)

    @classmethod
    def from_file(cls, path: str | Path) -> "Vocabulary":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "Vocabulary":
        return cls.parse(resources.files("byakta.data").joinpath("vocab.txt").read_text(encoding="utf-8"))

    def dump(self) -> str:
        return "\n".join(self.symbols) + "\n"

    def subset(self, keep) -> "Vocabulary":
        """Vocabulary restricted to PAD, END and the symbols for which `keep` is true."""
        return Vocabulary([PAD, END] + [s for s in self.symbols[2:] if keep(s)])

    def encode(self, tokens: Sequence[str]) -> list[int]:
        try:
            return [self.index[t] for t in tokens]
        except KeyError as exc:
            raise UnknownSymbol(exc.args[0]) from None

    def decode(self, ids: Iterable[int]) -> list[str]:
        out = []
        for i in ids:
            i = int(i)
            if not 0 <= i < len(self.symbols):
                raise IdOutOfRange(f"id {i} outside vocabulary of size {len(self.symbols)}")
            out.append(self.symbols[i])
        return out
