"""Bangla numeral verbalization.

Cardinals are read in the Indian grouping system: units 0-99 come straight
from the lexicon, then hundred, thousand (10^3), lakh (10^5) and crore (10^7).
The crore multiplier is itself read as a cardinal, so the scheme recurses for
numbers of ten digits and more.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import EmptyInput, NonDigitCharacter
from .script import digit_value, is_digit

SCALE_NAMES = ("hundred", "thousand", "lakh", "crore", "decimal")
MAX_CARDINAL_DIGITS = 15

_DIGIT = "0-9০-৯"
DIGIT_RUN_RE = re.compile(rf"[{_DIGIT}]+(?:\.[{_DIGIT}]+)?")


class NumeralKind(enum.Enum):
    CARDINAL = "Cardinal"
    DIGIT_BY_DIGIT = "DigitByDigit"
    DECIMAL = "Decimal"


@dataclass(frozen=True)
class NumeralLexicon:
    units: tuple[str, ...]
    hundred_word: str
    thousand_word: str
    lakh_word: str
    crore_word: str
    decimal_word: str

    def __post_init__(self):
        if len(self.units) != 100:
            raise ValueError(f"lexicon needs 100 unit entries, got {len(self.units)}")
        for i, word in enumerate(self.units):
            if not word or any(is_digit(c) for c in word):
                raise ValueError(f"bad lexicon entry for {i}: {word!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "NumeralLexicon":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "NumeralLexicon":
        text = resources.files("byakta.data").joinpath("lexicon.tsv").read_text(encoding="utf-8")
        return cls.parse(text)

    @classmethod
    def parse(cls, text: str) -> "NumeralLexicon":
        units: dict[int, str] = {}
        named: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, word = line.partition("\t")
            word = word.strip()
            if not sep or not word:
                raise ValueError(f"line {lineno}: expected '<key>\\t<word>'")
            if key.isdigit():
                units[int(key)] = word
            elif key in SCALE_NAMES:
                named[key] = word
            else:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
        missing = [n for n in range(100) if n not in units] + [k for k in SCALE_NAMES if k not in named]
        if missing:
            raise ValueError(f"lexicon is missing entries: {missing}")
        return cls(
            units=tuple(units[n] for n in range(100)),
            hundred_word=named["hundred"],
            thousand_word=named["thousand"],
            lakh_word=named["lakh"],
            crore_word=named["crore"],
            decimal_word=named["decimal"],
        )


def _cardinal(n: int, lex: NumeralLexicon) -> list[str]:
    if n < 100:
        return [lex.units[n]]
    words: list[str] = []
    crore, rest = divmod(n, 10**7)
    if crore:
        words += _cardinal(crore, lex) + [lex.crore_word]
    lakh, rest = divmod(rest, 10**5)
    if lakh:
        words += [lex.units[lakh], lex.lakh_word]
    thousand, rest = divmod(rest, 1000)
    if thousand:
        words += [lex.units[thousand], lex.thousand_word]
    hundred, rest = divmod(rest, 100)
    if hundred:
        words.append(lex.units[hundred] + lex.hundred_word)
    if rest:
        words.append(lex.units[rest])
    return words


def cardinal_words(n: int, lex: NumeralLexicon) -> str:
    if n < 0:
        raise ValueError("negative numbers are not verbalized")
    return " ".join(_cardinal(n, lex))


def _digit_words(digits: str, lex: NumeralLexicon) -> str:
    return " ".join(lex.units[digit_value(c)] for c in digits)


def _check_digits(digits: str) -> None:
    for c in digits:
        if not is_digit(c):
            raise NonDigitCharacter(f"unexpected character {c!r} in {digits!r}")


def number_to_words(digits: str, kind: NumeralKind, lexicon: NumeralLexicon) -> str:
    """Verbalize a run of ASCII or Bangla digits as space-separated Bangla words."""
    if not digits:
        raise EmptyInput("no digits to verbalize")
    if kind is NumeralKind.DECIMAL:
        whole, dot, frac = digits.partition(".")
        if not whole or not frac:
            raise NonDigitCharacter(f"malformed decimal {digits!r}")
        _check_digits(whole)
        _check_digits(frac)
        return " ".join(
            [number_to_words(whole, NumeralKind.CARDINAL, lexicon), lexicon.decimal_word, _digit_words(frac, lexicon)]
        )
    _check_digits(digits)
    if kind is NumeralKind.DIGIT_BY_DIGIT or len(digits) > MAX_CARDINAL_DIGITS:
        return _digit_words(digits, lexicon)
    value = int("".join(str(digit_value(c)) for c in digits))
    return cardinal_words(value, lexicon)


def detect_numeral_kind(digits: str, preceding: str = "") -> NumeralKind:
    """Pick the reading for a maximal digit run.

    `preceding` is the text immediately before the run; a '+' there marks an
    international phone number.
    """
    if digits.count(".") == 1:
        return NumeralKind.DECIMAL
    if len(digits) >= 10 or (len(digits) > 1 and digit_value(digits[0]) == 0) or preceding.endswith("+"):
        return NumeralKind.DIGIT_BY_DIGIT
    return NumeralKind.CARDINAL


def normalize_numerals(text: str, lexicon: NumeralLexicon) -> str:
    """Replace every digit run by its Bangla reading, leaving other text untouched."""
    out: list[str] = []
    pos = 0
    for m in DIGIT_RUN_RE.finditer(text):
        start, end = m.span()
        out.append(text[pos:start])
        run = m.group()
        words = number_to_words(run, detect_numeral_kind(run, text[max(start - 1, 0):start]), lexicon)
        if start > 0 and not text[start - 1].isspace():
            words = " " + words
        if end < len(text) and not text[end].isspace():
            words = words + " "
        out.append(words)
        pos = end
    out.append(text[pos:])
    return "".join(out)
