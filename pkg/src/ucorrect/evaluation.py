"""Error-rate metrics and latency measurement for correction runs.

WER follows the standard convention: 100 * (S + I + D) / reference length,
computed from a unit-cost alignment. Corpus-level figures aggregate error
counts before dividing, not per-sentence percentages. FAR is the fraction
of applied corrections that touched characters which were already correct
under the source/reference alignment.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .corpus import TokenSeq
from .errors import EmptyInput, InvalidInput, LengthMismatch

# Alignment ops, in backtrace preference order.
MATCH, SUB, DEL, INS = "match", "sub", "del", "ins"


@dataclass(frozen=True)
class WerStats:
    substitutions: int
    insertions: int
    deletions: int
    ref_len: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    @property
    def wer(self) -> float:
        return 100.0 * self.errors / self.ref_len

    def __add__(self, other: "WerStats") -> "WerStats":
        return WerStats(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
            self.ref_len + other.ref_len,
        )

    def to_dict(self) -> dict:
        return {
            "substitutions": self.substitutions,
            "insertions": self.insertions,
            "deletions": self.deletions,
            "ref_len": self.ref_len,
            "wer": self.wer,
        }


@dataclass(frozen=True)
class FarStats:
    corrections: int
    false_alarms: int

    def __post_init__(self):
        if not 0 <= self.false_alarms <= self.corrections:
            raise InvalidInput(
                f"false_alarms {self.false_alarms} outside [0, {self.corrections}]"
            )

    @property
    def far(self) -> float | None:
        """Percentage of corrections that were false alarms; None if none applied."""
        if self.corrections == 0:
            return None
        return 100.0 * self.false_alarms / self.corrections

    def __add__(self, other: "FarStats") -> "FarStats":
        return FarStats(
            self.corrections + other.corrections,
            self.false_alarms + other.false_alarms,
        )

    def to_dict(self) -> dict:
        return {
            "corrections": self.corrections,
            "false_alarms": self.false_alarms,
            "far": self.far,
        }


@dataclass(frozen=True)
class LatencyStats:
    mean_ms_per_sent: float
    p50: float
    p95: float
    total_sentences: int

    def to_dict(self) -> dict:
        return {
            "mean_ms_per_sent": self.mean_ms_per_sent,
            "p50": self.p50,
            "p95": self.p95,
            "total_sentences": self.total_sentences,
        }


@dataclass(frozen=True)
class EvalReport:
    baseline: WerStats
    system: WerStats
    werr: float
    far: FarStats
    latency: LatencyStats | None = None

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline.to_dict(),
            "system": self.system.to_dict(),
            "werr": self.werr,
            "far": self.far.to_dict(),
            "latency": self.latency.to_dict() if self.latency else None,
        }


def align(reference: TokenSeq, hypothesis: TokenSeq) -> list[tuple[str, int, int]]:
    """Unit-cost alignment as (op, ref_index, hyp_index) triples.

    Among equal-cost alignments the backtrace prefers match over
    substitution over deletion over insertion, making the result (and
    everything derived from it, notably FAR) deterministic. Indices are -1
    on the side an op does not touch.
    """
    ref = reference.texts()
    hyp = hypothesis.texts()
    rows, cols = len(ref), len(hyp)
    dist = [[0] * (cols + 1) for _ in range(rows + 1)]
    for i in range(1, rows + 1):
        dist[i][0] = i
    for j in range(1, cols + 1):
        dist[0][j] = j
    for i in range(1, rows + 1):
        for j in range(1, cols + 1):
            same = ref[i - 1] == hyp[j - 1]
            dist[i][j] = min(
                dist[i - 1][j - 1] + (0 if same else 1),
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
            )
    ops: list[tuple[str, int, int]] = []
    i, j = rows, cols
    while i > 0 or j > 0:
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and dist[i][j] == dist[i - 1][j - 1]:
            ops.append((MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            ops.append((SUB, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append((DEL, i - 1, -1))
            i = i - 1
        else:
            ops.append((INS, -1, j - 1))
            j = j - 1
    ops.reverse()
    return ops


def wer(reference: TokenSeq, hypothesis: TokenSeq) -> WerStats:
    """Error counts of a hypothesis against its reference."""
    if reference.n < 1:
        raise EmptyInput("reference must contain at least one token")
    ops = align(reference, hypothesis)
    counts = {MATCH: 0, SUB: 0, DEL: 0, INS: 0}
    for op, _, _ in ops:
        counts[op] += 1
    return WerStats(counts[SUB], counts[INS], counts[DEL], reference.n)


def corpus_wer(pairs: Iterable[tuple[TokenSeq, TokenSeq]]) -> WerStats:
    """Aggregate (reference, hypothesis) error counts over a corpus."""
    total = WerStats(0, 0, 0, 0)
    for reference, hypothesis in pairs:
        total = total + wer(reference, hypothesis)
    if total.ref_len == 0:
        raise EmptyInput("corpus contains no reference tokens")
    return total


def werr(base_wer: float, sys_wer: float) -> float:
    """Relative WER reduction in percent; negative when the system hurts."""
    if base_wer <= 0:
        raise InvalidInput(f"baseline WER must be > 0, got {base_wer}")
    return 100.0 * (base_wer - sys_wer) / base_wer


def far(source: TokenSeq, reference: TokenSeq, corrected: TokenSeq) -> FarStats:
    """Correction and false-alarm counts for one sentence.

    A source position is "already correct" when the source/reference
    alignment matches it to an equal reference token; any changed position
    counts as a correction and is a false alarm iff it was already correct.
    """
    if corrected.n != source.n:
        raise LengthMismatch(
            f"corrected length {corrected.n} != source length {source.n}"
        )
    already_correct = {
        hyp_idx for op, _, hyp_idx in align(reference, source) if op == MATCH
    }
    corrections = 0
    false_alarms = 0
    for position in range(source.n):
        if corrected.tokens[position].text != source.tokens[position].text:
            corrections += 1
            if position in already_correct:
                false_alarms += 1
    return FarStats(corrections, false_alarms)


def percentile(samples: Sequence[float], q: float) -> float:
    """Linear-interpolation percentile of an unsorted sample list."""
    if not samples:
        raise EmptyInput("no samples")
    ordered = sorted(samples)
    if len(ordered) == 1:
        return ordered[0]
    rank = (len(ordered) - 1) * q / 100.0
    low = math.floor(rank)
    high = math.ceil(rank)
    fraction = rank - low
    return ordered[low] * (1.0 - fraction) + ordered[high] * fraction


def bench_samples(
    pipeline: Callable[[TokenSeq], TokenSeq],
    corpus: Sequence[TokenSeq],
    warmup: int = 1,
    repeats: int = 1,
) -> list[float]:
    """Per-sentence wall-clock samples in ms, single-threaded.

    Warmup passes run untimed; each sentence is then timed in every repeat
    pass, so the sample count is len(corpus) * repeats.
    """
    if not corpus:
        raise EmptyInput("bench corpus is empty")
    if repeats < 1:
        raise InvalidInput(f"repeats must be >= 1, got {repeats}")
    for _ in range(max(0, warmup)):
        for sentence in corpus:
            pipeline(sentence)
    samples_ms: list[float] = []
    for _ in range(repeats):
        for sentence in corpus:
            start = time.perf_counter()
            pipeline(sentence)
            samples_ms.append((time.perf_counter() - start) * 1000.0)
    return samples_ms


def latency_from_samples(samples_ms: Sequence[float], total_sentences: int) -> LatencyStats:
    return LatencyStats(
        mean_ms_per_sent=sum(samples_ms) / len(samples_ms),
        p50=percentile(samples_ms, 50.0),
        p95=percentile(samples_ms, 95.0),
        total_sentences=total_sentences,
    )


def bench(
    pipeline: Callable[[TokenSeq], TokenSeq],
    corpus: Sequence[TokenSeq],
    warmup: int = 1,
    repeats: int = 1,
) -> LatencyStats:
    """Latency statistics over a corpus; see bench_samples for the protocol."""
    samples_ms = bench_samples(pipeline, corpus, warmup, repeats)
    return latency_from_samples(samples_ms, len(corpus))


def speedup(baseline_ms: float, mean_ms: float) -> float:
    """How many times faster than a baseline latency the measured mean is."""
    if baseline_ms <= 0 or mean_ms <= 0:
        raise InvalidInput("latencies must be positive")
    return baseline_ms / mean_ms


def evaluate_corpus(
    sources: Sequence[TokenSeq],
    references: Sequence[TokenSeq],
    corrected: Sequence[TokenSeq],
    latency: LatencyStats | None = None,
) -> EvalReport:
    """Corpus-level report: baseline WER, system WER, WERR, and FAR."""
    if not (len(sources) == len(references) == len(corrected)):
        raise LengthMismatch(
            f"got {len(sources)} sources, {len(references)} references, "
            f"{len(corrected)} corrected sentences"
        )
    if not sources:
        raise EmptyInput("nothing to evaluate")
    baseline = corpus_wer(zip(references, sources))
    system = corpus_wer(zip(references, corrected))
    far_total = FarStats(0, 0)
    for source, reference, fixed in zip(sources, references, corrected):
        far_total = far_total + far(source, reference, fixed)
    return EvalReport(
        baseline=baseline,
        system=system,
        werr=werr(baseline.wer, system.wer) if baseline.wer > 0 else 0.0,
        far=far_total,
        latency=latency,
    )
