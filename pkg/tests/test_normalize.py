from importlib import resources

import pytest
from hypothesis import given, strategies as st

from byakta.errors import EmptyAfterNormalization
from byakta.text import END, normalize_text
from byakta.text.normalize import detokenize, tokenize
from byakta.text.script import is_digit


def test_pass_through(vocab, lexicon):
    nt = normalize_text("কেমন আছো?", vocab, lexicon)
    assert nt.tokens == ("ক", "ে", "ম", "ন", " ", "আ", "ছ", "ো", "?", END)
    assert nt.dropped == 0


def test_lowercase_and_numeral(vocab, lexicon):
    assert normalize_text("Hello২", vocab, lexicon).tokens == tuple("hello দুই") + (END,)


def test_folding_and_whitespace(vocab, lexicon):
    assert normalize_text("  আমি\t\tযাই।  তুমি; এসো ", vocab, lexicon).text == "আমি যাই. তুমি, এসো"


def test_oov_dropped_and_counted(vocab, lexicon):
    nt = normalize_text("a€b ✓ c", vocab, lexicon)
    assert nt.text == "ab c"
    assert nt.dropped == 2


def test_nukta_letters_survive(vocab, lexicon):
    # ড় ঢ় য় decompose under NFC
    assert normalize_text("বাড়ি", vocab, lexicon).text == "বাড়ি"
    assert normalize_text("নয়", vocab, lexicon).text == "নয়"


@pytest.mark.parametrize("text", ["", "   ", "\n\t", "€€", "।।।", " ... , "])
def test_empty(vocab, lexicon, text):
    with pytest.raises(EmptyAfterNormalization):
        normalize_text(text, vocab, lexicon)


def _bench(name):
    text = resources.files("byakta.data").joinpath(name).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def test_benchmark_round_trip(vocab, lexicon):
    sentences = _bench("bench_bn.txt") + _bench("bench_bn_en.txt")
    assert len(sentences) == 120
    for s in sentences:
        nt = normalize_text(s, vocab, lexicon)
        assert detokenize(tokenize(nt, vocab), vocab) == nt.text
        assert nt.dropped == 0


mixed = st.text(alphabet=st.sampled_from(list("০১২৩৪৫৬৭৮৯0123456789.+ ,কখগআিেড়য়aBz?।!\n\t€\u2014;")), max_size=60)


@given(mixed)
def test_invariants(vocab, lexicon, text):
    try:
        nt = normalize_text(text, vocab, lexicon)
    except EmptyAfterNormalization:
        return
    assert nt.tokens[-1] == END and nt.tokens.count(END) == 1
    assert all(t in vocab for t in nt.tokens)
    assert not any(is_digit(c) for c in nt.text)
    assert normalize_text(nt.text, vocab, lexicon).tokens == nt.tokens
