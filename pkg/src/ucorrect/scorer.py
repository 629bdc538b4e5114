"""Masked-token scorers: the probability model behind detection and selection.

A scorer answers one question: given a sentence with a single masked
position, how probable is a candidate token there? The trainable
implementation is a bidirectional interpolated n-gram with additive
smoothing, small enough to train from a handful of lines yet exactly
reproducible by an independent counting oracle. A uniform scorer serves as
the degenerate reference implementation.

Probabilities are plain float arithmetic: add-k smoothing bounds every
probability well away from underflow, and exact reproducibility against the
counting oracle requires using the formula's own arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

from .corpus import Token, TokenSeq, Vocab, MASK_TOKEN
from .errors import EmptyInput, InvalidConfig, MaskIsSentinel

MODEL_FORMAT_VERSION = 1

# Boundary sentinel used in context keys; never a vocabulary id.
_PAD = -1


@dataclass(frozen=True)
class MaskedSeq:
    """A sentence with exactly one position masked."""

    base: TokenSeq
    mask_index: int

    def __post_init__(self):
        if not 0 <= self.mask_index < self.base.n:
            raise InvalidConfig(
                f"mask_index {self.mask_index} out of range for length {self.base.n}"
            )

    def texts(self) -> list[str]:
        """Surface texts with the mask sentinel at the masked position."""
        out = self.base.texts()
        out[self.mask_index] = MASK_TOKEN
        return out


@dataclass(frozen=True)
class TokenProb:
    token: Token
    prob: float


class Scorer(Protocol):
    """Contract shared by all scorer implementations."""

    def prob(self, masked: MaskedSeq, token: Token) -> float:
        """Probability of ``token`` at the masked position, in (0, 1]."""
        ...

    def top_candidates(self, masked: MaskedSeq, limit: int) -> list[TokenProb]:
        """The ``limit`` most probable fill-ins, descending, ties by code point."""
        ...


@dataclass(frozen=True)
class NgramConfig:
    """Hyperparameters of the n-gram scorer."""

    window: int = 2
    lam: float = 0.5
    add_k: float = 0.1

    def __post_init__(self):
        if self.window < 1:
            raise InvalidConfig(f"window must be >= 1, got {self.window}")
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidConfig(f"lambda must be in [0, 1], got {self.lam}")
        if self.add_k <= 0.0:
            raise InvalidConfig(f"add_k must be > 0, got {self.add_k}")


def _check_regular(vocab: Vocab, token: Token) -> None:
    if token.id in (vocab.mask_id, vocab.unk_id):
        raise MaskIsSentinel(f"cannot score sentinel token {token.text!r}")


class UniformScorer:
    """Assigns 1/V to every regular token regardless of context."""

    def __init__(self, vocab: Vocab):
        if vocab.size < 1:
            raise InvalidConfig("uniform scorer needs a non-empty vocabulary")
        self.vocab = vocab

    def prob(self, masked: MaskedSeq, token: Token) -> float:
        _check_regular(self.vocab, token)
        return 1.0 / self.vocab.size

    def top_candidates(self, masked: MaskedSeq, limit: int) -> list[TokenProb]:
        if limit < 1:
            raise InvalidConfig(f"limit must be >= 1, got {limit}")
        p = 1.0 / self.vocab.size
        return [TokenProb(t, p) for t in self.vocab.regular_tokens()[:limit]]


Counts = dict[tuple[int, ...], dict[int, int]]


def _count_side(counts: Counts, ids: list[int], window: int, skip: set[int]) -> None:
    """Accumulate context -> target counts for one sentence, one direction.

    Contexts of every order 1..window are recorded, padded with the boundary
    sentinel where the sentence starts. Targets that are reserved ids are
    skipped so the distribution stays normalized over regular tokens.
    """
    for i, target in enumerate(ids):
        if target in skip:
            continue
        for order in range(1, window + 1):
            ctx = tuple(ids[j] if j >= 0 else _PAD for j in range(i - order, i))
            bucket = counts.setdefault(ctx, {})
            bucket[target] = bucket.get(target, 0) + 1


class NgramScorer:
    """Bidirectional interpolated n-gram masked-token model.

    ``left_counts[ctx][t]`` counts how often token t followed context ctx
    (the ctx tokens immediately to its left, nearest last). ``right_counts``
    is the same table trained on reversed sentences, so the right-hand
    context of a position is queried by mirroring the sequence.

    Per side, the full-width context is used when it was seen in training;
    otherwise the add-k smoothed probabilities of all seen shorter orders
    are averaged, falling back to uniform when no order was seen at all.
    """

    def __init__(
        self,
        vocab: Vocab,
        config: NgramConfig,
        left_counts: Counts,
        right_counts: Counts,
        version: int = MODEL_FORMAT_VERSION,
    ):
        if vocab.size < 1:
            raise InvalidConfig("n-gram scorer needs a non-empty vocabulary")
        self.vocab = vocab
        self.config = config
        self.left_counts = left_counts
        self.right_counts = right_counts
        self.version = version
        self._left_totals = {c: sum(b.values()) for c, b in left_counts.items()}
        self._right_totals = {c: sum(b.values()) for c, b in right_counts.items()}

    @property
    def window(self) -> int:
        return self.config.window

    def _side_prob(
        self,
        counts: Counts,
        totals: dict[tuple[int, ...], int],
        ids: list[int],
        index: int,
        target_id: int,
    ) -> float:
        k = self.config.add_k
        v = self.vocab.size
        full = None
        seen: list[float] = []
        for order in range(1, self.config.window + 1):
            ctx = tuple(ids[j] if j >= 0 else _PAD for j in range(index - order, index))
            bucket = counts.get(ctx)
            if bucket is None:
                continue
            p = (bucket.get(target_id, 0) + k) / (totals[ctx] + k * v)
            if order == self.config.window:
                full = p
            seen.append(p)
        if full is not None:
            return full
        if not seen:
            return 1.0 / v
        return sum(seen) / len(seen)

    def prob(self, masked: MaskedSeq, token: Token) -> float:
        _check_regular(self.vocab, token)
        ids = [t.id for t in masked.base.tokens]
        i = masked.mask_index
        p_left = self._side_prob(self.left_counts, self._left_totals, ids, i, token.id)
        reversed_ids = ids[::-1]
        j = len(ids) - 1 - i
        p_right = self._side_prob(
            self.right_counts, self._right_totals, reversed_ids, j, token.id
        )
        lam = self.config.lam
        return lam * p_left + (1.0 - lam) * p_right

    def top_candidates(self, masked: MaskedSeq, limit: int) -> list[TokenProb]:
        if limit < 1:
            raise InvalidConfig(f"limit must be >= 1, got {limit}")
        scored = [TokenProb(t, self.prob(masked, t)) for t in self.vocab.regular_tokens()]
        scored.sort(key=lambda tp: (-tp.prob, tp.token.text))
        return scored[:limit]

    def save(self, path: str | Path) -> None:
        document = {
            "version": self.version,
            "window": self.config.window,
            "lambda": self.config.lam,
            "add_k": self.config.add_k,
            "vocab": self.vocab.to_dict(),
            "left_counts": _encode_counts(self.left_counts),
            "right_counts": _encode_counts(self.right_counts),
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(document, handle, ensure_ascii=False)
            handle.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "NgramScorer":
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
        if document.get("version") != MODEL_FORMAT_VERSION:
            raise InvalidConfig(
                f"unsupported model format version {document.get('version')!r}"
            )
        config = NgramConfig(
            window=document["window"],
            lam=document["lambda"],
            add_k=document["add_k"],
        )
        vocab = Vocab.from_dict(document["vocab"])
        return cls(
            vocab,
            config,
            _decode_counts(document["left_counts"]),
            _decode_counts(document["right_counts"]),
            version=document["version"],
        )


def _encode_counts(counts: Counts) -> dict[str, dict[str, int]]:
    return {
        ",".join(str(i) for i in ctx): {str(t): c for t, c in bucket.items()}
        for ctx, bucket in counts.items()
    }


def _decode_counts(encoded: dict[str, dict[str, int]]) -> Counts:
    return {
        tuple(int(i) for i in key.split(",")): {int(t): c for t, c in bucket.items()}
        for key, bucket in encoded.items()
    }


def train_ngram(
    corpus: Iterable[TokenSeq],
    config: NgramConfig | None = None,
    vocab: Vocab | None = None,
) -> NgramScorer:
    """Train an n-gram scorer by counting contexts over a corpus.

    Counts are plain sums, so the result is independent of sentence order.
    """
    config = config or NgramConfig()
    if vocab is None:
        raise InvalidConfig("train_ngram requires a vocabulary")
    skip = {vocab.mask_id, vocab.unk_id}
    left: Counts = {}
    right: Counts = {}
    sentences = 0
    for seq in corpus:
        ids = [t.id for t in seq.tokens]
        _count_side(left, ids, config.window, skip)
        _count_side(right, ids[::-1], config.window, skip)
        sentences += 1
    if sentences == 0:
        raise EmptyInput("training corpus is empty")
    return NgramScorer(vocab, config, left, right)


def fine_tune(
    scorer: NgramScorer,
    domain_corpus: Iterable[TokenSeq],
    weight: float = 1.0,
) -> NgramScorer:
    """Continue training by adding ``weight`` x domain counts to the base counts.

    With weight 1 this equals training on the union of both corpora; as the
    weight grows the scorer converges to a domain-only model.
    """
    if weight <= 0:
        raise InvalidConfig(f"fine-tune weight must be > 0, got {weight}")
    skip = {scorer.vocab.mask_id, scorer.vocab.unk_id}
    domain_left: Counts = {}
    domain_right: Counts = {}
    sentences = 0
    for seq in domain_corpus:
        ids = [t.id for t in seq.tokens]
        _count_side(domain_left, ids, scorer.config.window, skip)
        _count_side(domain_right, ids[::-1], scorer.config.window, skip)
        sentences += 1
    if sentences == 0:
        raise EmptyInput("fine-tune corpus is empty")

    def merge(base: Counts, domain: Counts) -> Counts:
        merged: Counts = {ctx: dict(bucket) for ctx, bucket in base.items()}
        for ctx, bucket in domain.items():
            target = merged.setdefault(ctx, {})
            for token_id, count in bucket.items():
                increment = weight * count
                if isinstance(increment, float) and increment.is_integer():
                    increment = int(increment)
                target[token_id] = target.get(token_id, 0) + increment
        return merged

    return NgramScorer(
        scorer.vocab,
        scorer.config,
        merge(scorer.left_counts, domain_left),
        merge(scorer.right_counts, domain_right),
    )
