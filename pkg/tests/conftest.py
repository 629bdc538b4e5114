import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ucorrect.corpus import TokenSeq, Vocab, tokenize
from ucorrect.phonetics import PhonemeTable
from ucorrect.scorer import NgramConfig, train_ngram


@pytest.fixture
def abcd_vocab() -> Vocab:
    return Vocab("abcd")


@pytest.fixture
def identity_table() -> PhonemeTable:
    # Empty table: every token falls back to its own text as phonemes.
    return PhonemeTable()


def seq(text: str, vocab: Vocab) -> TokenSeq:
    return tokenize(text, vocab)


@pytest.fixture
def abcd_x5_scorer(abcd_vocab):
    """w=1 scorer trained on "abcd" x5; probabilities derivable by recount."""
    corpus = [seq("abcd", abcd_vocab) for _ in range(5)]
    return train_ngram(corpus, NgramConfig(window=1), abcd_vocab)


@pytest.fixture
def abcd_x20_scorer(abcd_vocab):
    corpus = [seq("abcd", abcd_vocab) for _ in range(20)]
    return train_ngram(corpus, NgramConfig(window=1), abcd_vocab)
