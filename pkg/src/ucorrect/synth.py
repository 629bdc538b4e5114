"""Seeded synthetic error injection for building test corpora.

Each token independently draws one event (substitute, insert-after, delete,
keep). Randomness comes from a per-sentence MT19937 generator whose seed is
derived by SHA-256 from (corpus seed, sentence index), so injection is
deterministic, order-independent, and shardable.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .corpus import Token, TokenSeq, Vocab
from .errors import InvalidConfig
from .phonetics import PhonemeTable, similarity, to_phonemes


@dataclass(frozen=True)
class NoiseConfig:
    p_sub: float = 0.0
    p_ins: float = 0.0
    p_del: float = 0.0
    confusable_only: bool = False
    # Minimum phonetic similarity for a substitution when confusable_only.
    tau: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("p_sub", "p_ins", "p_del"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1], got {value}")
        if self.p_sub + self.p_ins + self.p_del > 1.0:
            raise InvalidConfig("p_sub + p_ins + p_del must not exceed 1")
        if not 0.0 <= self.tau <= 1.0:
            raise InvalidConfig(f"tau must be in [0, 1], got {self.tau}")


class Edit(NamedTuple):
    kind: str  # "sub" | "ins" | "del"
    position: int  # reference-side index; "ins" inserts after it
    original: str | None
    replacement: str | None


@dataclass(frozen=True)
class NoisyPair:
    source: TokenSeq
    reference: TokenSeq
    edits: tuple[Edit, ...]


def _sentence_rng(seed: int, index: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{index}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _substitution_pool(
    original: Token,
    vocab: Vocab,
    table: PhonemeTable,
    cfg: NoiseConfig,
) -> list[Token]:
    """Eligible replacement tokens, in code-point order for determinism."""
    pool = [t for t in vocab.regular_tokens() if t.text != original.text]
    if cfg.confusable_only:
        original_ph = to_phonemes(table, original)
        pool = [
            t
            for t in pool
            if similarity(to_phonemes(table, t), original_ph) >= cfg.tau
        ]
    return pool


def _corrupt_one(
    index: int,
    reference: TokenSeq,
    cfg: NoiseConfig,
    table: PhonemeTable,
    vocab: Vocab,
) -> NoisyPair:
    rng = _sentence_rng(cfg.seed, index)
    regular = vocab.regular_tokens()
    out: list[Token] = []
    edits: list[Edit] = []
    for position, token in enumerate(reference.tokens):
        draw = rng.random()
        if draw < cfg.p_sub:
            pool = _substitution_pool(token, vocab, table, cfg)
            if pool:
                replacement = pool[rng.randrange(len(pool))]
                out.append(replacement)
                edits.append(Edit("sub", position, token.text, replacement.text))
            else:
                out.append(token)
        elif draw < cfg.p_sub + cfg.p_ins:
            inserted = regular[rng.randrange(len(regular))]
            out.append(token)
            out.append(inserted)
            edits.append(Edit("ins", position, None, inserted.text))
        elif draw < cfg.p_sub + cfg.p_ins + cfg.p_del:
            edits.append(Edit("del", position, token.text, None))
        else:
            out.append(token)
    if not out:
        # Everything was deleted; keep the sentence's last token.
        last = reference.n - 1
        edits = [e for e in edits if not (e.kind == "del" and e.position == last)]
        out = [reference.tokens[last]]
    return NoisyPair(TokenSeq(tuple(out)), reference, tuple(edits))


def inject(
    corpus: Sequence[TokenSeq],
    cfg: NoiseConfig,
    table: PhonemeTable,
    vocab: Vocab,
) -> list[NoisyPair]:
    """Corrupt every sentence independently under the configured event rates."""
    if vocab.size < 2:
        raise InvalidConfig("injection needs at least 2 regular vocab tokens")
    return [_corrupt_one(i, seq, cfg, table, vocab) for i, seq in enumerate(corpus)]


def inject_exactly_one(
    corpus: Sequence[TokenSeq],
    cfg: NoiseConfig,
    table: PhonemeTable,
    vocab: Vocab,
) -> list[NoisyPair]:
    """Apply exactly one substitution per sentence at a random position.

    Positions are tried in shuffled order until one has an eligible
    replacement pool; a sentence with no eligible position anywhere is
    returned unchanged.
    """
    if vocab.size < 2:
        raise InvalidConfig("injection needs at least 2 regular vocab tokens")
    pairs: list[NoisyPair] = []
    for index, reference in enumerate(corpus):
        rng = _sentence_rng(cfg.seed, index)
        positions = list(range(reference.n))
        rng.shuffle(positions)
        edits: tuple[Edit, ...] = ()
        source = reference
        for position in positions:
            token = reference.tokens[position]
            pool = _substitution_pool(token, vocab, table, cfg)
            if not pool:
                continue
            replacement = pool[rng.randrange(len(pool))]
            source = reference.replace(position, replacement)
            edits = (Edit("sub", position, token.text, replacement.text),)
            break
        pairs.append(NoisyPair(source, reference, edits))
    return pairs


def apply_edits(reference: TokenSeq, edits: Sequence[Edit], vocab: Vocab) -> TokenSeq:
    """Replay an edit list against the clean sentence; reproduces the source."""
    by_position: dict[int, list[Edit]] = {}
    for edit in edits:
        by_position.setdefault(edit.position, []).append(edit)
    out: list[Token] = []
    for position, token in enumerate(reference.tokens):
        pending = by_position.get(position, [])
        deleted = any(e.kind == "del" for e in pending)
        substitution = next((e for e in pending if e.kind == "sub"), None)
        if substitution is not None:
            out.append(vocab.token(substitution.replacement))
        elif not deleted:
            out.append(token)
        for edit in pending:
            if edit.kind == "ins":
                out.append(vocab.token(edit.replacement))
    if not out:
        out = [reference.tokens[-1]]
    return TokenSeq(tuple(out))
