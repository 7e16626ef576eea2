from .normalize import NormalizedText, detokenize, normalize_text, tokenize
from .numerals import NumeralKind, NumeralLexicon, detect_numeral_kind, normalize_numerals, number_to_words
from .script import ScriptClass, classify_script
from .vocab import END, PAD, Vocabulary

__all__ = [
    "END", "PAD", "NormalizedText", "NumeralKind", "NumeralLexicon", "ScriptClass", "Vocabulary",
    "classify_script", "detect_numeral_kind", "detokenize", "normalize_numerals", "normalize_text",
    "number_to_words", "tokenize",
]
