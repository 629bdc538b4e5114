"""Phoneme conversion and phonetic similarity for candidate filtering.

Similarity is normalized Levenshtein distance over phoneme strings: 1 for
identical strings, 0 when every position differs. Tokens missing from the
phoneme table fall back to their own text, which keeps the generator total
over any vocabulary.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .corpus import Token
from .errors import MalformedLine

log = logging.getLogger(__name__)


class PhonemeTable:
    """Mapping from token text to a phoneme string (e.g. pinyin + tone digit)."""

    def __init__(self, mapping: dict[str, str] | None = None):
        self._map: dict[str, str] = dict(mapping or {})

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, text: str) -> bool:
        return text in self._map

    def get(self, text: str) -> str:
        """Phonemes for a text; missing entries fall back to the text itself."""
        return self._map.get(text, text)


def load_phoneme_table(path: str | Path) -> PhonemeTable:
    """Load a `token<TAB>phonemes` TSV; `#` lines are comments.

    Duplicate tokens are allowed; the last entry wins with a warning.
    """
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if line.count("\t") != 1:
                raise MalformedLine(line_no, "expected `token<TAB>phonemes`")
            token_text, phonemes = line.split("\t")
            if not token_text or not phonemes:
                raise MalformedLine(line_no, "empty token or phoneme field")
            if token_text in mapping:
                log.warning(
                    "%s:%d duplicate phoneme entry for %r, last wins",
                    path,
                    line_no,
                    token_text,
                )
            mapping[token_text] = phonemes
    return PhonemeTable(mapping)


def to_phonemes(table: PhonemeTable, token: Token) -> str:
    return table.get(token.text)


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance, iterative two-row DP."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                current.append(previous[j - 1])
            else:
                current.append(1 + min(previous[j - 1], previous[j], current[-1]))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    """Normalized phonetic similarity in [0, 1]; 1 iff the strings are equal."""
    if not a and not b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - levenshtein(a, b) / longest
