"""Unsupervised detect-generate-select correction for ASR transcripts."""

__version__ = "0.1.0"

from .corpus import (
    MASK_TOKEN,
    UNK_TOKEN,
    ParallelCorpus,
    Token,
    TokenSeq,
    Vocab,
    build_vocab,
    detokenize,
    load_parallel,
    tokenize,
)
from .correction import (
    CorrectionTrace,
    DetectionResult,
    FilteredCandidates,
    PipelineConfig,
    ScoredSentence,
    correct,
    correct_corpus,
    detect,
    generate,
    score_sentence,
    select,
)
from .evaluation import (
    EvalReport,
    FarStats,
    LatencyStats,
    WerStats,
    bench,
    evaluate_corpus,
    far,
    wer,
    werr,
)
from .external import ExternalScorerClient
from .phonetics import PhonemeTable, load_phoneme_table, similarity, to_phonemes
from .scorer import (
    MaskedSeq,
    NgramConfig,
    NgramScorer,
    TokenProb,
    UniformScorer,
    fine_tune,
    train_ngram,
)
from .synth import NoiseConfig, NoisyPair, apply_edits, inject, inject_exactly_one

__all__ = [
    "MASK_TOKEN",
    "UNK_TOKEN",
    "ParallelCorpus",
    "Token",
    "TokenSeq",
    "Vocab",
    "build_vocab",
    "detokenize",
    "load_parallel",
    "tokenize",
    "CorrectionTrace",
    "DetectionResult",
    "FilteredCandidates",
    "PipelineConfig",
    "ScoredSentence",
    "correct",
    "correct_corpus",
    "detect",
    "generate",
    "score_sentence",
    "select",
    "EvalReport",
    "FarStats",
    "LatencyStats",
    "WerStats",
    "bench",
    "evaluate_corpus",
    "far",
    "wer",
    "werr",
    "ExternalScorerClient",
    "PhonemeTable",
    "load_phoneme_table",
    "similarity",
    "to_phonemes",
    "MaskedSeq",
    "NgramConfig",
    "NgramScorer",
    "TokenProb",
    "UniformScorer",
    "fine_tune",
    "train_ngram",
    "NoiseConfig",
    "NoisyPair",
    "apply_edits",
    "inject",
    "inject_exactly_one",
]
