import json
import sys
from pathlib import Path

import pytest

from ucorrect.cli import main

from accept_fixtures import build_clean_sentences

STUB = str(Path(__file__).parent / "stub_adapter.py")


@pytest.fixture
def workspace(tmp_path):
    sentences = build_clean_sentences()
    clean = tmp_path / "clean.txt"
    clean.write_text("".join(s + "\n" for s in sentences), encoding="utf-8")
    train = tmp_path / "train.txt"
    train.write_text(
        "".join(s + "\n" for s in sentences for _ in range(5)), encoding="utf-8"
    )
    table = tmp_path / "phonemes.tsv"
    rows = []
    letters = "abcdefghijklmnopqrst"
    consonants = "bcdfghjklm"
    vowels = "nopqrstuvw"
    for i in range(10):
        rows.append(f"{letters[2 * i]}\t{consonants[i]}{vowels[i]}1")
        rows.append(f"{letters[2 * i + 1]}\t{consonants[i]}{vowels[i]}2")
    table.write_text("".join(r + "\n" for r in rows), encoding="utf-8")
    return tmp_path


def run(argv):
    return main([str(a) for a in argv])


class TestWorkflow:
    def test_train_inject_correct_eval(self, workspace, capsys):
        clean = workspace / "clean.txt"
        model = workspace / "model.json"
        noisy = workspace / "noisy.tsv"
        corrupted = workspace / "corrupted.txt"
        corrected = workspace / "corrected.txt"
        report = workspace / "report.json"
        table = workspace / "phonemes.tsv"

        assert run(["train", "--corpus", workspace / "train.txt", "--out", model]) == 0
        assert model.exists()

        assert run([
            "inject", "--in", clean, "--out", noisy, "--seed", 991,
            "--exactly-one", "--confusable-only", "--phoneme-table", table,
            "--edits-json", workspace / "edits.json",
        ]) == 0
        corrupted.write_text(
            "".join(line.split("\t")[0] + "\n"
                    for line in noisy.read_text(encoding="utf-8").splitlines()),
            encoding="utf-8",
        )

        assert run([
            "correct", "--in", corrupted, "--out", corrected,
            "--model", model, "--phoneme-table", table,
            "--trace", workspace / "traces.jsonl",
        ]) == 0
        assert corrected.read_text(encoding="utf-8") == clean.read_text(encoding="utf-8")

        assert run([
            "eval", "--pairs", noisy, "--corrected", corrected,
            "--report", report, "--figures-dir", workspace / "figs",
        ]) == 0
        captured = capsys.readouterr()
        assert "No correction" in captured.out
        payload = json.loads(report.read_text(encoding="utf-8"))
        assert payload["system"]["wer"] == 0.0
        assert payload["werr"] == pytest.approx(100.0)
        assert (workspace / "figs" / "wer_comparison.png").exists()
        assert (workspace / "figs" / "corrections_breakdown.png").exists()

    def test_trace_lines_match_sentences(self, workspace):
        clean = workspace / "clean.txt"
        model = workspace / "model.json"
        run(["train", "--corpus", workspace / "train.txt", "--out", model])
        out = workspace / "out.txt"
        traces = workspace / "traces.jsonl"
        run(["correct", "--in", clean, "--out", out, "--model", model,
             "--trace", traces])
        lines = traces.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 200
        first = json.loads(lines[0])
        assert set(first) == {"input", "iterations", "output"}

    def test_uniform_scorer_keeps_input(self, workspace):
        clean = workspace / "clean.txt"
        out = workspace / "out.txt"
        assert run([
            "correct", "--in", clean, "--out", out, "--scorer", "uniform",
        ]) == 0
        assert out.read_text(encoding="utf-8") == clean.read_text(encoding="utf-8")

    def test_external_scorer_matches_uniform(self, workspace):
        clean = workspace / "small.txt"
        clean.write_text("abcd\nabad\ndcba\n", encoding="utf-8")
        vocab_file = workspace / "vocab.txt"
        vocab_file.write_text("a\nb\nc\nd\n", encoding="utf-8")
        uniform_out = workspace / "uniform.txt"
        external_out = workspace / "external.txt"
        assert run(["correct", "--in", clean, "--out", uniform_out,
                    "--scorer", "uniform"]) == 0
        command = f"{sys.executable} {STUB} uniform {vocab_file}"
        assert run(["correct", "--in", clean, "--out", external_out,
                    "--scorer", "external", "--scorer-cmd", command]) == 0
        assert external_out.read_bytes() == uniform_out.read_bytes()

    def test_blank_lines_pass_through(self, workspace):
        source = workspace / "with_blanks.txt"
        source.write_text("abcd\n\nabcd\n", encoding="utf-8")
        out = workspace / "out.txt"
        assert run(["correct", "--in", source, "--out", out,
                    "--scorer", "uniform"]) == 0
        assert out.read_text(encoding="utf-8") == "abcd\n\nabcd\n"


class TestDeterminism:
    def test_inject_byte_identical(self, workspace):
        clean = workspace / "clean.txt"
        outs = []
        for name in ("n1.tsv", "n2.tsv"):
            path = workspace / name
            assert run(["inject", "--in", clean, "--out", path,
                        "--seed", 7, "--p-sub", 0.2]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_correct_byte_identical(self, workspace):
        clean = workspace / "clean.txt"
        model = workspace / "model.json"
        run(["train", "--corpus", workspace / "train.txt", "--out", model])
        outs, traces = [], []
        for tag in ("1", "2"):
            out = workspace / f"out{tag}.txt"
            trace = workspace / f"trace{tag}.jsonl"
            assert run(["correct", "--in", clean, "--out", out,
                        "--model", model, "--trace", trace]) == 0
            outs.append(out.read_bytes())
            traces.append(trace.read_bytes())
        assert outs[0] == outs[1]
        assert traces[0] == traces[1]


class TestBench:
    def test_latency_block_with_speedup(self, workspace, capsys):
        clean = workspace / "small.txt"
        clean.write_text("abcd\nabad\n", encoding="utf-8")
        model = workspace / "model.json"
        run(["train", "--corpus", workspace / "train.txt", "--out", model])
        assert run([
            "bench", "--in", clean, "--model", model,
            "--warmup", 1, "--repeats", 2, "--baseline-ms", 149.5,
            "--figures-dir", workspace / "figs",
        ]) == 0
        block = json.loads(capsys.readouterr().out)
        assert block["total_sentences"] == 2
        assert block["speedup"] == pytest.approx(
            149.5 / block["mean_ms_per_sent"], rel=1e-9
        )
        assert (workspace / "figs" / "latency_hist.png").exists()


class TestConfigAndErrors:
    def test_config_file_with_flag_override(self, workspace):
        clean = workspace / "clean.txt"
        model = workspace / "model.json"
        run(["train", "--corpus", workspace / "train.txt", "--out", model])
        config = workspace / "config.json"
        config.write_text(json.dumps({
            "scorer": {"kind": "ngram", "model_path": str(model)},
            "pipeline": {"l": 10, "m": 4},
            "workers": 1,
        }), encoding="utf-8")
        out = workspace / "out.txt"
        assert run(["correct", "--in", clean, "--out", out,
                    "--config", config, "--m", 2]) == 0
        assert out.exists()

    def test_usage_error_exit_1(self, workspace):
        clean = workspace / "clean.txt"
        model = workspace / "model.json"
        run(["train", "--corpus", workspace / "train.txt", "--out", model])
        out = workspace / "out.txt"
        # l < m violates the pipeline contract
        assert run(["correct", "--in", clean, "--out", out,
                    "--model", model, "--l", 1, "--m", 4]) == 1

    def test_unknown_flag_exit_1(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["correct", "--nonsense"])
        assert excinfo.value.code == 1

    def test_data_error_exit_2(self, workspace):
        out = workspace / "out.txt"
        assert run(["correct", "--in", workspace / "missing.txt",
                    "--out", out, "--scorer", "uniform"]) == 2

    def test_malformed_pairs_exit_2(self, workspace):
        bad = workspace / "bad.tsv"
        bad.write_text("no tab here\n", encoding="utf-8")
        corrected = workspace / "c.txt"
        corrected.write_text("x\n", encoding="utf-8")
        assert run(["eval", "--pairs", bad, "--corrected", corrected]) == 2
