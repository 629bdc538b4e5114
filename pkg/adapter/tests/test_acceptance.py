"""Acceptance: protocol conformance of the adapter (criterion 11).

The primary pipeline is exercised strictly through its CLI; the adapter
runs as a child process speaking the wire protocol.
"""

import json
import shutil
import subprocess
import sys
from contextlib import contextmanager


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except Exception:
        print(f"criterion {number:2d} FAIL  {description}")
        raise
    print(f"criterion {number:2d} PASS  {description}")


def validate_response_line(line: str, pending: dict[int, int]) -> None:
    payload = json.loads(line)
    assert isinstance(payload, dict)
    if "error" in payload:
        assert payload["id"] is None or isinstance(payload["id"], int)
        return
    response_id = payload["id"]
    assert response_id in pending, f"response for unknown id {response_id}"
    top_l = pending.pop(response_id)
    assert isinstance(payload["prob_orig"], (int, float))
    assert 0.0 < payload["prob_orig"] <= 1.0
    top = payload["top"]
    assert isinstance(top, list) and len(top) <= top_l
    for entry in top:
        assert isinstance(entry, list) and len(entry) == 2
        text, prob = entry
        assert isinstance(text, str)
        assert 0.0 < prob <= 1.0
    assert top == sorted(top, key=lambda kv: (-kv[1], kv[0]))


def test_criterion_11_protocol_conformance(data_dir, tmp_path):
    ucorrect = shutil.which("ucorrect")
    assert ucorrect, "the primary ucorrect CLI must be installed"
    with criterion(11, "golden replay is schema-valid, id-matched, byte-identical; "
                       "uniform-stub pipeline matches native uniform exactly"):
        # Golden transcript replay through the stub model.
        result = subprocess.run(
            [sys.executable, "-m", "ucorrect_adapter.cli", "serve",
             "--model", f"uniform:{data_dir / 'golden_vocab.txt'}"],
            stdin=open(data_dir / "golden_requests.jsonl", "rb"),
            capture_output=True,
            timeout=60,
        )
        assert result.returncode == 0
        assert result.stdout == (data_dir / "golden_responses.jsonl").read_bytes()

        lines = result.stdout.decode("utf-8").splitlines()
        assert lines[0] == '{"hello":"ucorrect-scorer","version":1}'
        pending = {}
        for raw in (data_dir / "golden_requests.jsonl").read_text("utf-8").splitlines():
            try:
                request = json.loads(raw)
                if isinstance(request.get("id"), int):
                    pending[request["id"]] = request.get("top_l", 0)
            except json.JSONDecodeError:
                continue
        answered = dict(pending)
        for line in lines[1:]:
            validate_response_line(line, answered)

        # Differential test: external uniform adapter vs native uniform
        # scorer, both through the primary CLI.
        corpus = tmp_path / "input.txt"
        corpus.write_text("abcd\nabad\ndcba\naabb\nd\n", encoding="utf-8")
        vocab_file = tmp_path / "vocab.txt"
        vocab_file.write_text("a\nb\nc\nd\n", encoding="utf-8")
        native_out = tmp_path / "native.txt"
        native_trace = tmp_path / "native.jsonl"
        external_out = tmp_path / "external.txt"
        external_trace = tmp_path / "external.jsonl"
        assert subprocess.run(
            [ucorrect, "correct", "--in", str(corpus), "--out", str(native_out),
             "--scorer", "uniform", "--trace", str(native_trace)],
            capture_output=True, timeout=60,
        ).returncode == 0
        adapter_cmd = (
            f"{sys.executable} -m ucorrect_adapter.cli serve "
            f"--model uniform:{vocab_file}"
        )
        assert subprocess.run(
            [ucorrect, "correct", "--in", str(corpus), "--out", str(external_out),
             "--scorer", "external", "--scorer-cmd", adapter_cmd,
             "--trace", str(external_trace)],
            capture_output=True, timeout=60,
        ).returncode == 0
        assert external_out.read_bytes() == native_out.read_bytes()
        assert external_trace.read_bytes() == native_trace.read_bytes()
