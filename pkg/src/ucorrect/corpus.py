"""Text ingestion, character-level tokenization, and vocabulary handling.

Sentences are treated as unsegmented streams of Unicode grapheme clusters:
whitespace is deleted rather than tokenized, and every cluster is one token.
Unknown clusters map to the reserved unk id but keep their surface text so
that reconstructing the sentence is lossless.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import regex

from .errors import EmptyInput, InvalidConfig, MalformedLine

MASK_TOKEN = "[MASK]"
UNK_TOKEN = "[UNK]"

_GRAPHEME = regex.compile(r"\X")


def graphemes(text: str) -> list[str]:
    """Split NFC-normalized text into grapheme clusters, dropping whitespace."""
    normalized = unicodedata.normalize("NFC", text)
    return [g for g in _GRAPHEME.findall(normalized) if not g.isspace()]


@dataclass(frozen=True)
class Token:
    """One grapheme cluster with its vocabulary id.

    For unknown clusters ``id`` is the vocab's unk id while ``text`` keeps
    the original surface form.
    """

    id: int
    text: str


@dataclass(frozen=True)
class TokenSeq:
    """A sentence as an ordered, non-empty sequence of tokens."""

    tokens: tuple[Token, ...]

    def __post_init__(self):
        if not self.tokens:
            raise EmptyInput("a token sequence must contain at least one token")

    @property
    def n(self) -> int:
        return len(self.tokens)

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]

    def text(self) -> str:
        """Reassemble the surface sentence (inverse of tokenize)."""
        return "".join(t.text for t in self.tokens)

    def replace(self, index: int, token: Token) -> "TokenSeq":
        """A copy with one position substituted."""
        items = list(self.tokens)
        items[index] = token
        return TokenSeq(tuple(items))

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


class Vocab:
    """Bijection between token texts and ids, with reserved mask/unk ids.

    Ids 0 and 1 are the mask and unk sentinels; regular tokens occupy
    2..len+1 so the reserved ids never collide with them.
    """

    MASK_ID = 0
    UNK_ID = 1
    _RESERVED = 2

    def __init__(self, texts: Iterable[str]):
        self._id_to_text: dict[int, str] = {
            self.MASK_ID: MASK_TOKEN,
            self.UNK_ID: UNK_TOKEN,
        }
        self._text_to_id: dict[str, int] = {
            MASK_TOKEN: self.MASK_ID,
            UNK_TOKEN: self.UNK_ID,
        }
        for text in texts:
            if text in self._text_to_id:
                continue
            new_id = self._RESERVED + self.size
            self._id_to_text[new_id] = text
            self._text_to_id[text] = new_id

    @property
    def mask_id(self) -> int:
        return self.MASK_ID

    @property
    def unk_id(self) -> int:
        return self.UNK_ID

    @property
    def size(self) -> int:
        """Number of regular (non-reserved) tokens."""
        return len(self._id_to_text) - 2

    def id_of(self, text: str) -> int:
        """Vocabulary id for a text; unknown texts map to the unk id."""
        return self._text_to_id.get(text, self.UNK_ID)

    def text_of(self, token_id: int) -> str:
        return self._id_to_text[token_id]

    def __contains__(self, text: str) -> bool:
        return text in self._text_to_id and text not in (MASK_TOKEN, UNK_TOKEN)

    def token(self, text: str) -> Token:
        """Token for a surface text, preserving unknown surface forms."""
        return Token(self.id_of(text), text)

    def regular_tokens(self) -> list[Token]:
        """All non-reserved tokens in code-point order of their text."""
        items = sorted(
            (text, tid)
            for text, tid in self._text_to_id.items()
            if tid not in (self.MASK_ID, self.UNK_ID)
        )
        return [Token(tid, text) for text, tid in items]

    def regular_texts(self) -> list[str]:
        return [t.text for t in self.regular_tokens()]

    def to_dict(self) -> dict:
        # Tokens are serialized in id order: reconstruction assigns ids by
        # position, so the text<->id mapping survives the round trip.
        texts_by_id = [
            self._id_to_text[i] for i in range(self._RESERVED, self._RESERVED + self.size)
        ]
        return {"mask": MASK_TOKEN, "unk": UNK_TOKEN, "tokens": texts_by_id}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocab":
        return cls(data["tokens"])


@dataclass
class ParallelCorpus:
    """Aligned (source, reference) sentence pairs from a TSV file."""

    pairs: list[tuple[TokenSeq, TokenSeq]]
    line_numbers: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.pairs:
            raise EmptyInput("a parallel corpus must contain at least one pair")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def tokenize(text: str, vocab: Vocab) -> TokenSeq:
    """Tokenize one sentence into grapheme-cluster tokens under a vocab.

    Whitespace (including internal) is removed; unknown clusters keep their
    surface text under the unk id.

    Raises EmptyInput when the text is empty or whitespace-only.
    """
    clusters = graphemes(text)
    if not clusters:
        raise EmptyInput("cannot tokenize empty or whitespace-only text")
    return TokenSeq(tuple(vocab.token(g) for g in clusters))


def detokenize(seq: TokenSeq) -> str:
    return seq.text()


def build_vocab(lines: Iterable[str], max_size: int) -> Vocab:
    """Vocabulary of the ``max_size`` most frequent grapheme clusters.

    Frequency ties break by code-point order, which also makes the result
    independent of input line order. Mask and unk ids are reserved on top of
    the budget.
    """
    if max_size < 1:
        raise InvalidConfig(f"max_size must be at least 1, got {max_size}")
    counts: Counter[str] = Counter()
    for line in lines:
        counts.update(graphemes(line))
    if not counts:
        raise EmptyInput("no non-empty lines to build a vocabulary from")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocab(text for text, _ in ranked[:max_size])


def read_lines(path: str | Path) -> list[str]:
    """Non-blank lines of a plain UTF-8 corpus, in file order."""
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle]


def load_parallel(path: str | Path, vocab: Vocab) -> ParallelCorpus:
    """Load a `source<TAB>reference` TSV into tokenized pairs.

    Blank lines are skipped; every other line must contain exactly one TAB.
    Line numbers (1-based) are preserved for diagnostics.
    """
    pairs: list[tuple[TokenSeq, TokenSeq]] = []
    line_numbers: list[int] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.count("\t") != 1:
                raise MalformedLine(line_no, "expected exactly one TAB")
            source_text, reference_text = line.split("\t")
            try:
                source = tokenize(source_text, vocab)
                reference = tokenize(reference_text, vocab)
            except EmptyInput as exc:
                raise MalformedLine(line_no, str(exc)) from exc
            pairs.append((source, reference))
            line_numbers.append(line_no)
    if not pairs:
        raise EmptyInput(f"no sentence pairs in {path}")
    return ParallelCorpus(pairs, line_numbers)
