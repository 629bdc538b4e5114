"""The detect-generate-select pipeline for substitution repair.

Token score orientation: a position's score is its surprisal
(-ln p(token | context)), so the detector picks the maximum, the sentence
score is the mean surprisal, and the selector picks the minimum. Unknown
tokens get infinite surprisal: out-of-vocabulary characters are strong
evidence of a transcription error and are prioritized for replacement.

The pipeline only ever substitutes, so output length always equals input
length. Because the input sentence itself competes in the selection round,
the output score never exceeds the input score.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .corpus import Token, TokenSeq, Vocab, MASK_TOKEN, UNK_TOKEN
from .errors import InvalidConfig
from .phonetics import PhonemeTable, similarity, to_phonemes
from .scorer import MaskedSeq, Scorer

INFINITE_SURPRISAL = float("inf")


@dataclass(frozen=True)
class PipelineConfig:
    """Candidate-list width, filter size, and iteration limit."""

    top_l: int = 10
    top_m: int = 4
    max_iters: int = 1
    detection_threshold: float | None = None

    def __post_init__(self):
        if self.top_m < 1 or self.top_l < self.top_m:
            raise InvalidConfig(
                f"need top_l >= top_m >= 1, got l={self.top_l} m={self.top_m}"
            )
        if self.max_iters < 1:
            raise InvalidConfig(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True)
class DetectionResult:
    """Per-position surprisals and the positions ranked most-suspicious first."""

    surprisals: tuple[float, ...]
    ranked: tuple[int, ...]

    @property
    def top(self) -> int:
        return self.ranked[0]


class Candidate(NamedTuple):
    token: Token
    scorer_prob: float
    similarity: float


@dataclass(frozen=True)
class FilteredCandidates:
    """Phonetically filtered replacements for one position."""

    position: int
    items: tuple[Candidate, ...]


@dataclass(frozen=True)
class ScoredSentence:
    """A sentence with its mean surprisal; per-position values kept for reuse."""

    sentence: TokenSeq
    score: float
    surprisals: tuple[float, ...]


class SelectResult(NamedTuple):
    chosen: TokenSeq
    scored: list[ScoredSentence]
    chosen_index: int


@dataclass(frozen=True)
class Iteration:
    detected_position: int
    candidates: FilteredCandidates
    scored: tuple[ScoredSentence, ...]
    chosen_index: int


@dataclass(frozen=True)
class CorrectionTrace:
    """Full record of one pipeline run."""

    input: TokenSeq
    iterations: tuple[Iteration, ...]
    output: TokenSeq

    def changed_positions(self) -> list[int]:
        return [
            i
            for i, (a, b) in enumerate(zip(self.input.tokens, self.output.tokens))
            if a.text != b.text
        ]

    def to_dict(self) -> dict:
        return {
            "input": self.input.texts(),
            "iterations": [
                {
                    "detected_position": it.detected_position,
                    "candidates": {
                        "position": it.candidates.position,
                        "items": [
                            {
                                "token": c.token.text,
                                "scorer_prob": c.scorer_prob,
                                "similarity": c.similarity,
                            }
                            for c in it.candidates.items
                        ],
                    },
                    "scored": [
                        {
                            "sentence": s.sentence.texts(),
                            "score": s.score if math.isfinite(s.score) else None,
                        }
                        for s in it.scored
                    ],
                    "chosen_index": it.chosen_index,
                }
                for it in self.iterations
            ],
            "output": self.output.texts(),
        }

    def to_json(self) -> str:
        # Non-finite scores serialize as null; JSON has no Infinity literal.
        return json.dumps(self.to_dict(), ensure_ascii=False)


def _is_sentinel(token: Token) -> bool:
    return token.id in (Vocab.MASK_ID, Vocab.UNK_ID) or token.text in (
        MASK_TOKEN,
        UNK_TOKEN,
    )


def _surprisal(scorer: Scorer, seq: TokenSeq, index: int) -> float:
    token = seq.tokens[index]
    if _is_sentinel(token):
        return INFINITE_SURPRISAL
    return -math.log(scorer.prob(MaskedSeq(seq, index), token))


def detect(scorer: Scorer, x: TokenSeq) -> DetectionResult:
    """Score every position by masking it and asking for its own token.

    Ranking is by descending surprisal, ties broken by ascending index.
    """
    surprisals = tuple(_surprisal(scorer, x, i) for i in range(x.n))
    ranked = tuple(sorted(range(x.n), key=lambda i: (-surprisals[i], i)))
    return DetectionResult(surprisals, ranked)


def generate(
    scorer: Scorer,
    table: PhonemeTable,
    x: TokenSeq,
    position: int,
    top_l: int,
    top_m: int,
) -> FilteredCandidates:
    """Top-l scorer candidates at a masked position, filtered to the m most
    phonetically similar to the original token.

    The original token and the sentinels are dropped: the unmodified
    sentence already competes in selection. Ordering is by descending
    similarity, then descending scorer probability, then code point.
    """
    if top_m < 1 or top_l < top_m:
        raise InvalidConfig(f"need top_l >= top_m >= 1, got l={top_l} m={top_m}")
    original = x.tokens[position]
    original_phonemes = to_phonemes(table, original)
    raw = scorer.top_candidates(MaskedSeq(x, position), top_l)
    items = [
        Candidate(
            tp.token,
            tp.prob,
            similarity(to_phonemes(table, tp.token), original_phonemes),
        )
        for tp in raw
        if tp.token.text != original.text and not _is_sentinel(tp.token)
    ]
    items.sort(key=lambda c: (-c.similarity, -c.scorer_prob, c.token.text))
    return FilteredCandidates(position, tuple(items[:top_m]))


def score_sentence(
    scorer: Scorer,
    y: TokenSeq,
    base: ScoredSentence | None = None,
    edited_index: int | None = None,
) -> ScoredSentence:
    """Mean surprisal under one-at-a-time masking.

    When ``base`` and ``edited_index`` are given and the scorer exposes a
    context ``window`` (the native n-gram), only positions within that
    window of the edit are recomputed; the result is identical to a full
    recomputation since no other position's context changed.
    """
    window = getattr(scorer, "window", None)
    if base is not None and edited_index is not None and window is not None:
        if base.sentence.n != y.n:
            raise InvalidConfig("incremental rescore requires equal lengths")
        surprisals = list(base.surprisals)
        lo = max(0, edited_index - window)
        hi = min(y.n, edited_index + window + 1)
        for i in range(lo, hi):
            surprisals[i] = _surprisal(scorer, y, i)
    else:
        surprisals = [_surprisal(scorer, y, i) for i in range(y.n)]
    return ScoredSentence(y, sum(surprisals) / y.n, tuple(surprisals))


def select(scorer: Scorer, x: TokenSeq, cands: FilteredCandidates) -> SelectResult:
    """Score the original and every candidate sentence; keep the minimum.

    The original is scored first, so equal scores keep the sentence
    unchanged; among candidates, earlier (more similar) ones win ties.
    """
    base = score_sentence(scorer, x)
    scored = [base]
    for candidate in cands.items:
        variant = x.replace(cands.position, candidate.token)
        scored.append(
            score_sentence(scorer, variant, base=base, edited_index=cands.position)
        )
    chosen_index = min(range(len(scored)), key=lambda i: (scored[i].score, i))
    return SelectResult(scored[chosen_index].sentence, scored, chosen_index)


def correct(
    scorer: Scorer,
    table: PhonemeTable,
    x: TokenSeq,
    config: PipelineConfig | None = None,
) -> CorrectionTrace:
    """Run detect -> generate -> select until a fixed point or max_iters.

    With the default single iteration, exactly one position is considered.
    The optional detection threshold skips a sentence whose most suspicious
    position scores below it.
    """
    config = config or PipelineConfig()
    current = x
    iterations: list[Iteration] = []
    for _ in range(config.max_iters):
        detection = detect(scorer, current)
        position = detection.top
        if (
            config.detection_threshold is not None
            and detection.surprisals[position] < config.detection_threshold
        ):
            break
        cands = generate(scorer, table, current, position, config.top_l, config.top_m)
        result = select(scorer, current, cands)
        iterations.append(
            Iteration(position, cands, tuple(result.scored), result.chosen_index)
        )
        if result.chosen_index == 0:
            break
        current = result.chosen
    return CorrectionTrace(x, tuple(iterations), current)


def correct_corpus(
    scorer: Scorer,
    table: PhonemeTable,
    corpus: Iterable[TokenSeq],
    config: PipelineConfig | None = None,
    workers: int = 1,
) -> list[CorrectionTrace]:
    """Correct a corpus with a bounded worker pool; output order matches input.

    Scorers are immutable, so concurrent sentences are safe; every sentence
    is still processed deterministically.
    """
    sentences = list(corpus)
    if workers <= 1:
        return [correct(scorer, table, s, config) for s in sentences]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: correct(scorer, table, s, config), sentences))
