"""Command-line entry point: train, finetune, correct, inject, eval, bench.

Every option can also come from a JSON config file (--config); explicit
flags win over config values. Exit status is 0 on success, 1 on usage
errors, 2 on data errors; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .corpus import TokenSeq, Vocab, build_vocab, load_parallel, read_lines, tokenize
from .correction import PipelineConfig, correct, correct_corpus
from .errors import InvalidConfig, InvalidInput, UcorrectError
from .evaluation import (
    bench_samples,
    evaluate_corpus,
    latency_from_samples,
    speedup,
)
from .external import ExternalScorerClient
from .phonetics import PhonemeTable, load_phoneme_table
from .report import (
    render_eval_table,
    render_latency_table,
    save_eval_figures,
    save_latency_figure,
)
from .scorer import NgramConfig, NgramScorer, UniformScorer, fine_tune, train_ngram
from .synth import NoiseConfig, inject, inject_exactly_one

USAGE_ERROR = 1
DATA_ERROR = 2

_BUNDLED_TABLES = {"latin": "latin_identity.tsv", "pinyin": "pinyin_small.tsv"}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise InvalidConfig("config file must contain a JSON object")
    for key in ("model_path", "phoneme_table"):
        value = _dig(config, "scorer", key) if key == "model_path" else config.get(key)
        if isinstance(value, str) and value not in _BUNDLED_TABLES and not Path(value).exists():
            raise InvalidConfig(f"config path does not exist: {value}")
    return config


def _dig(config: dict, *path, default=None):
    node = config
    for key in path:
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


def _pick(flag_value, config_value, default):
    if flag_value is not None:
        return flag_value
    if config_value is not None:
        return config_value
    return default


def _resolve_table(name_or_path: str | None) -> PhonemeTable:
    if not name_or_path:
        return PhonemeTable()
    if name_or_path in _BUNDLED_TABLES:
        ref = resources.files("ucorrect").joinpath("data", _BUNDLED_TABLES[name_or_path])
        with resources.as_file(ref) as path:
            return load_phoneme_table(path)
    return load_phoneme_table(name_or_path)


def _tokenize_lines(lines: list[str], vocab: Vocab) -> list[TokenSeq]:
    return [tokenize(line, vocab) for line in lines if line.strip()]


def _build_scorer(args, config):
    """Scorer instance plus the vocabulary the pipeline should tokenize with."""
    kind = _pick(args.scorer, _dig(config, "scorer", "kind"), "ngram")
    if kind == "ngram":
        model_path = _pick(args.model, _dig(config, "scorer", "model_path"), None)
        if not model_path:
            raise InvalidConfig("scorer kind 'ngram' requires --model")
        scorer = NgramScorer.load(model_path)
        return scorer, scorer.vocab
    max_vocab = _pick(args.max_vocab, _dig(config, "scorer", "max_vocab"), 8000)
    lines = read_lines(args.input)
    vocab = build_vocab((l for l in lines if l.strip()), max_vocab)
    if kind == "uniform":
        return UniformScorer(vocab), vocab
    if kind == "external":
        command = _pick(args.scorer_cmd, _dig(config, "scorer", "command"), None)
        tcp = _pick(args.scorer_tcp, _dig(config, "scorer", "tcp"), None)
        timeout = _pick(args.scorer_timeout, _dig(config, "scorer", "timeout"), 10.0)
        if command:
            return ExternalScorerClient.spawn(command, vocab, timeout), vocab
        if tcp:
            host, _, port = tcp.rpartition(":")
            return ExternalScorerClient.connect(host, int(port), vocab, timeout), vocab
        raise InvalidConfig("scorer kind 'external' requires --scorer-cmd or --scorer-tcp")
    raise InvalidConfig(f"unknown scorer kind {kind!r}")


def _pipeline_config(args, config) -> PipelineConfig:
    return PipelineConfig(
        top_l=_pick(args.l, _dig(config, "pipeline", "l"), 10),
        top_m=_pick(args.m, _dig(config, "pipeline", "m"), 4),
        max_iters=_pick(args.max_iters, _dig(config, "pipeline", "max_iters"), 1),
        detection_threshold=_pick(
            args.detection_threshold,
            _dig(config, "pipeline", "detection_threshold"),
            None,
        ),
    )


def _add_scorer_options(parser):
    group = parser.add_argument_group("scorer")
    group.add_argument("--scorer", choices=["ngram", "uniform", "external"],
                       help="scorer backend (default ngram)")
    group.add_argument("--model", help="n-gram model JSON (for --scorer ngram)")
    group.add_argument("--scorer-cmd",
                       help="command line of an external scorer process")
    group.add_argument("--scorer-tcp", metavar="HOST:PORT",
                       help="TCP endpoint of an external scorer")
    group.add_argument("--scorer-timeout", type=float,
                       help="external scorer timeout in seconds (default 10)")
    group.add_argument("--max-vocab", type=int,
                       help="vocab budget when building from input (default 8000)")


def _add_pipeline_options(parser):
    group = parser.add_argument_group("pipeline")
    group.add_argument("--l", type=int, dest="l",
                       help="candidates generated per position (default 10)")
    group.add_argument("--m", type=int, dest="m",
                       help="candidates kept after phonetic filtering (default 4)")
    group.add_argument("--max-iters", type=int, help="correction rounds (default 1)")
    group.add_argument("--detection-threshold", type=float,
                       help="skip sentences whose top surprisal is below this")
    group.add_argument("--phoneme-table",
                       help="phoneme TSV path, or bundled table 'latin'/'pinyin'")
    group.add_argument("--workers", type=int,
                       help="sentence-level worker pool size (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ucorrect",
                     description="Unsupervised substitution-error correction "
                                 "for ASR transcripts.")
    parser.add_argument("--version", action="version", version=f"ucorrect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the n-gram scorer on plain text")
    p_train.add_argument("--corpus", required=True, help="plain corpus, one sentence per line")
    p_train.add_argument("--out", required=True, help="model JSON output path")
    p_train.add_argument("--window", type=int, help="context width per side (default 2)")
    p_train.add_argument("--lam", type=float, help="left/right interpolation (default 0.5)")
    p_train.add_argument("--add-k", type=float, help="additive smoothing (default 0.1)")
    p_train.add_argument("--max-vocab", type=int, help="vocabulary budget (default 8000)")
    p_train.add_argument("--config")
    p_train.set_defaults(func=cmd_train)

    p_ft = sub.add_parser("finetune", help="continue training on domain text")
    p_ft.add_argument("--model", required=True, help="base model JSON")
    p_ft.add_argument("--corpus", required=True, help="domain corpus, one sentence per line")
    p_ft.add_argument("--weight", type=float, default=1.0,
                      help="weight of domain counts (default 1.0)")
    p_ft.add_argument("--out", required=True, help="fine-tuned model output path")
    p_ft.add_argument("--config")
    p_ft.set_defaults(func=cmd_finetune)

    p_correct = sub.add_parser("correct", help="correct a plain corpus line by line")
    p_correct.add_argument("--in", dest="input", required=True)
    p_correct.add_argument("--out", dest="output", required=True)
    p_correct.add_argument("--trace", help="write one CorrectionTrace JSON per sentence")
    p_correct.add_argument("--config")
    _add_scorer_options(p_correct)
    _add_pipeline_options(p_correct)
    p_correct.set_defaults(func=cmd_correct)

    p_inject = sub.add_parser("inject", help="write a noisy parallel TSV from clean text")
    p_inject.add_argument("--in", dest="input", required=True)
    p_inject.add_argument("--out", dest="output", required=True, help="TSV source<TAB>reference")
    p_inject.add_argument("--edits-json", help="sidecar with per-sentence edit lists")
    p_inject.add_argument("--seed", type=int, help="injection seed (default 0)")
    p_inject.add_argument("--p-sub", type=float, help="substitution probability per token")
    p_inject.add_argument("--p-ins", type=float, help="insertion probability per token")
    p_inject.add_argument("--p-del", type=float, help="deletion probability per token")
    p_inject.add_argument("--confusable-only", action="store_true", default=None,
                          help="restrict substitutions to phonetic confusables")
    p_inject.add_argument("--tau", type=float,
                          help="similarity floor for confusables (default 0.5)")
    p_inject.add_argument("--exactly-one", action="store_true", default=None,
                          help="exactly one substitution per sentence")
    p_inject.add_argument("--phoneme-table")
    p_inject.add_argument("--max-vocab", type=int)
    p_inject.add_argument("--config")
    p_inject.set_defaults(func=cmd_inject)

    p_eval = sub.add_parser("eval", help="score corrected output against a parallel TSV")
    p_eval.add_argument("--pairs", required=True, help="source<TAB>reference TSV")
    p_eval.add_argument("--corrected", required=True, help="corrected text, one per line")
    p_eval.add_argument("--report", help="write the EvalReport JSON here")
    p_eval.add_argument("--figures-dir", help="render report figures into this directory")
    p_eval.add_argument("--max-vocab", type=int)
    p_eval.add_argument("--config")
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="measure correction latency per sentence")
    p_bench.add_argument("--in", dest="input", required=True)
    p_bench.add_argument("--warmup", type=int, help="untimed passes (default 1)")
    p_bench.add_argument("--repeats", type=int, help="timed passes (default 3)")
    p_bench.add_argument("--baseline-ms", type=float,
                         help="reference latency for the speedup ratio")
    p_bench.add_argument("--report", help="write the latency block JSON here")
    p_bench.add_argument("--figures-dir")
    p_bench.add_argument("--config")
    _add_scorer_options(p_bench)
    _add_pipeline_options(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def cmd_train(args) -> int:
    config = _load_config(args.config)
    lines = [l for l in read_lines(args.corpus) if l.strip()]
    max_vocab = _pick(args.max_vocab, _dig(config, "scorer", "max_vocab"), 8000)
    vocab = build_vocab(lines, max_vocab)
    ngram_config = NgramConfig(
        window=_pick(args.window, _dig(config, "scorer", "window"), 2),
        lam=_pick(args.lam, _dig(config, "scorer", "lambda"), 0.5),
        add_k=_pick(args.add_k, _dig(config, "scorer", "add_k"), 0.1),
    )
    scorer = train_ngram(_tokenize_lines(lines, vocab), ngram_config, vocab)
    scorer.save(args.out)
    print(
        f"trained on {len(lines)} sentences, vocab {vocab.size}, saved {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_finetune(args) -> int:
    _load_config(args.config)
    scorer = NgramScorer.load(args.model)
    lines = [l for l in read_lines(args.corpus) if l.strip()]
    tuned = fine_tune(scorer, _tokenize_lines(lines, scorer.vocab), args.weight)
    tuned.save(args.out)
    print(
        f"fine-tuned on {len(lines)} sentences (weight {args.weight}), saved {args.out}",
        file=sys.stderr,
    )
    return 0


def cmd_correct(args) -> int:
    config = _load_config(args.config)
    scorer, vocab = _build_scorer(args, config)
    table = _resolve_table(_pick(args.phoneme_table, config.get("phoneme_table"), None))
    pipe_config = _pipeline_config(args, config)
    workers = _pick(args.workers, config.get("workers"), 1)
    lines = read_lines(args.input)
    sentences = [tokenize(l, vocab) for l in lines if l.strip()]
    traces = correct_corpus(scorer, table, sentences, pipe_config, workers)
    trace_iter = iter(traces)
    with open(args.output, "w", encoding="utf-8") as out:
        for line in lines:
            if line.strip():
                out.write(next(trace_iter).output.text() + "\n")
            else:
                out.write("\n")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            for trace in traces:
                handle.write(trace.to_json() + "\n")
    changed = sum(len(t.changed_positions()) for t in traces)
    print(
        f"corrected {len(sentences)} sentences, changed {changed} tokens",
        file=sys.stderr,
    )
    if hasattr(scorer, "close"):
        scorer.close()
    return 0


def cmd_inject(args) -> int:
    config = _load_config(args.config)
    lines = [l for l in read_lines(args.input) if l.strip()]
    max_vocab = _pick(args.max_vocab, _dig(config, "scorer", "max_vocab"), 8000)
    vocab = build_vocab(lines, max_vocab)
    table = _resolve_table(_pick(args.phoneme_table, config.get("phoneme_table"), None))
    noise = NoiseConfig(
        p_sub=_pick(args.p_sub, _dig(config, "noise", "p_sub"), 0.0),
        p_ins=_pick(args.p_ins, _dig(config, "noise", "p_ins"), 0.0),
        p_del=_pick(args.p_del, _dig(config, "noise", "p_del"), 0.0),
        confusable_only=bool(
            _pick(args.confusable_only, _dig(config, "noise", "confusable_only"), False)
        ),
        tau=_pick(args.tau, _dig(config, "noise", "tau"), 0.5),
        seed=_pick(args.seed, _dig(config, "noise", "seed"), 0),
    )
    sentences = _tokenize_lines(lines, vocab)
    exactly_one = bool(_pick(args.exactly_one, _dig(config, "noise", "exactly_one"), False))
    if exactly_one:
        pairs = inject_exactly_one(sentences, noise, table, vocab)
    else:
        pairs = inject(sentences, noise, table, vocab)
    with open(args.output, "w", encoding="utf-8") as out:
        for pair in pairs:
            out.write(f"{pair.source.text()}\t{pair.reference.text()}\n")
    if args.edits_json:
        sidecar = [
            {
                "line": i + 1,
                "edits": [e._asdict() for e in pair.edits],
            }
            for i, pair in enumerate(pairs)
        ]
        with open(args.edits_json, "w", encoding="utf-8") as handle:
            json.dump(sidecar, handle, ensure_ascii=False, indent=2)
            handle.write("\n")
    edited = sum(1 for p in pairs if p.edits)
    print(f"injected noise into {edited}/{len(pairs)} sentences", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    max_vocab = _pick(args.max_vocab, _dig(config, "scorer", "max_vocab"), 8000)
    raw_pairs = read_lines(args.pairs)
    vocab = build_vocab(
        (part for line in raw_pairs for part in line.split("\t") if part.strip()),
        max_vocab,
    )
    parallel = load_parallel(args.pairs, vocab)
    corrected_lines = [l for l in read_lines(args.corrected) if l.strip()]
    corrected = [tokenize(l, vocab) for l in corrected_lines]
    sources = [src for src, _ in parallel.pairs]
    references = [ref for _, ref in parallel.pairs]
    report = evaluate_corpus(sources, references, corrected)
    print(render_eval_table(report))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(report.to_dict(), handle, ensure_ascii=False, indent=2)
            handle.write("\n")
    if args.figures_dir:
        for path in save_eval_figures(report, args.figures_dir):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    config = _load_config(args.config)
    scorer, vocab = _build_scorer(args, config)
    table = _resolve_table(_pick(args.phoneme_table, config.get("phoneme_table"), None))
    pipe_config = _pipeline_config(args, config)
    lines = [l for l in read_lines(args.input) if l.strip()]
    sentences = [tokenize(l, vocab) for l in lines]
    warmup = _pick(args.warmup, _dig(config, "bench", "warmup"), 1)
    repeats = _pick(args.repeats, _dig(config, "bench", "repeats"), 3)
    samples = bench_samples(
        lambda seq: correct(scorer, table, seq, pipe_config).output,
        sentences,
        warmup=warmup,
        repeats=repeats,
    )
    latency = latency_from_samples(samples, len(sentences))
    block = latency.to_dict()
    baseline_ms = _pick(args.baseline_ms, _dig(config, "bench", "baseline_ms"), None)
    ratio = None
    if baseline_ms is not None:
        ratio = speedup(baseline_ms, latency.mean_ms_per_sent)
        block["speedup"] = ratio
    print(json.dumps(block, ensure_ascii=False, indent=2))
    print(render_latency_table(latency, ratio), file=sys.stderr)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as handle:
            json.dump(block, handle, ensure_ascii=False, indent=2)
            handle.write("\n")
    if args.figures_dir:
        path = save_latency_figure(samples, latency, args.figures_dir)
        print(f"wrote {path}", file=sys.stderr)
    if hasattr(scorer, "close"):
        scorer.close()
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfig, InvalidInput) as exc:
        print(f"ucorrect: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (UcorrectError, OSError, json.JSONDecodeError) as exc:
        print(f"ucorrect: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
