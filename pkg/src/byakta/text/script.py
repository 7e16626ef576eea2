"""Unicode script classification for the bilingual front-end."""

import enum
import unicodedata


class ScriptClass(enum.Enum):
    BANGLA_LETTER = "BanglaLetter"
    BANGLA_DIGIT = "BanglaDigit"
    LATIN_LETTER = "LatinLetter"
    ASCII_DIGIT = "AsciiDigit"
    PUNCTUATION = "Punctuation"
    WHITESPACE = "Whitespace"
    OTHER = "Other"


BENGALI_BLOCK = (0x0980, 0x09FF)
BENGALI_DIGITS = (0x09E6, 0x09EF)


def classify_script(char: str) -> ScriptClass:
    """Classify a single character. Total over all Unicode scalar values."""
    cp = ord(char)
    if BENGALI_DIGITS[0] <= cp <= BENGALI_DIGITS[1]:
        return ScriptClass.BANGLA_DIGIT
    if BENGALI_BLOCK[0] <= cp <= BENGALI_BLOCK[1]:
        return ScriptClass.BANGLA_LETTER
    if 0x30 <= cp <= 0x39:
        return ScriptClass.ASCII_DIGIT
    if char.isspace():
        return ScriptClass.WHITESPACE
    if ("a" <= char <= "z") or ("A" <= char <= "Z"):
        return ScriptClass.LATIN_LETTER
    category = unicodedata.category(char)
    if category.startswith("L") and unicodedata.name(char, "").startswith("LATIN"):
        return ScriptClass.LATIN_LETTER
    if category.startswith("P"):
        return ScriptClass.PUNCTUATION
    return ScriptClass.OTHER


def is_digit(char: str) -> bool:
    return classify_script(char) in (ScriptClass.ASCII_DIGIT, ScriptClass.BANGLA_DIGIT)


def digit_value(char: str) -> int:
    """Numeric value of an ASCII or Bangla digit."""
    cp = ord(char)
    if 0x30 <= cp <= 0x39:
        return cp - 0x30
    if BENGALI_DIGITS[0] <= cp <= BENGALI_DIGITS[1]:
        return cp - BENGALI_DIGITS[0]
    raise ValueError(f"not a digit: {char!r}")
