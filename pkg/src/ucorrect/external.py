"""Client for external scorer processes speaking line-delimited JSON.

One JSON object per line, UTF-8, LF terminated, over a child process's
standard streams or a TCP connection. The adapter must greet with
``{"hello":"ucorrect-scorer","version":1}`` before serving requests.
Responses may arrive out of order; they are matched to requests by id.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import threading
import time
from typing import IO

from .corpus import Token, Vocab
from .errors import InvalidConfig, ProcessExited, ProtocolError, Timeout
from .scorer import MaskedSeq, TokenProb

PROTOCOL_NAME = "ucorrect-scorer"
PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT = 10.0


def encode_request(
    request_id: int, tokens: list[str], mask_index: int, top_l: int, orig: str
) -> str:
    """One request line, without the trailing LF. Key order is fixed."""
    payload = {
        "id": request_id,
        "tokens": tokens,
        "mask_index": mask_index,
        "top_l": top_l,
        "orig": orig,
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def decode_response(line: str, top_l: int) -> tuple[int, float, list[tuple[str, float]]]:
    """Parse and validate one response line; returns (id, prob_orig, top)."""
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"response is not valid JSON: {line!r}") from exc
    if not isinstance(payload, dict):
        raise ProtocolError(f"response is not an object: {line!r}")
    if "error" in payload:
        raise ProtocolError(f"scorer error: {payload['error']}")
    response_id = payload.get("id")
    if not isinstance(response_id, int):
        raise ProtocolError(f"response id missing or not an integer: {line!r}")
    prob_orig = payload.get("prob_orig")
    if not isinstance(prob_orig, (int, float)) or not 0.0 < prob_orig <= 1.0:
        raise ProtocolError(f"prob_orig out of (0, 1]: {prob_orig!r}")
    raw_top = payload.get("top", [])
    if not isinstance(raw_top, list):
        raise ProtocolError("top must be a list")
    if len(raw_top) > top_l:
        raise ProtocolError(f"top has {len(raw_top)} entries, limit was {top_l}")
    top: list[tuple[str, float]] = []
    for entry in raw_top:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ProtocolError(f"top entry is not a (token, prob) pair: {entry!r}")
        text, prob = entry
        if not isinstance(text, str) or not isinstance(prob, (int, float)):
            raise ProtocolError(f"top entry has wrong types: {entry!r}")
        if not 0.0 < prob <= 1.0:
            raise ProtocolError(f"top probability out of (0, 1]: {prob!r}")
        top.append((text, float(prob)))
    expected = sorted(top, key=lambda tp: (-tp[1], tp[0]))
    if top != expected:
        raise ProtocolError("top is not sorted by descending probability")
    return response_id, float(prob_orig), top


class ExternalScorerClient:
    """Blocking client for the scorer wire protocol.

    Implements the same prob/top_candidates surface as the native scorers,
    so the pipeline runs unchanged against an external model. A background
    reader thread matches responses to pending requests by id, which
    tolerates out-of-order replies and lets several workers share one
    connection.
    """

    def __init__(
        self,
        reader: IO[str],
        writer: IO[str],
        vocab: Vocab | None = None,
        timeout: float = DEFAULT_TIMEOUT,
        process: subprocess.Popen | None = None,
    ):
        self._reader = reader
        self._writer = writer
        self.vocab = vocab
        self.timeout = timeout
        self._process = process
        self._next_id = 1
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._results: dict[int, tuple[float, list[tuple[str, float]]] | Exception] = {}
        self._pending_top_l: dict[int, int] = {}
        self._fatal: Exception | None = None
        self._handshake_done = threading.Event()
        self._thread = threading.Thread(target=self._read_loop, daemon=True)
        self._thread.start()
        if not self._handshake_done.wait(self.timeout):
            raise Timeout("no handshake from external scorer")
        with self._lock:
            if self._fatal is not None:
                raise self._fatal

    @classmethod
    def spawn(
        cls,
        command: str | list[str],
        vocab: Vocab | None = None,
        timeout: float = DEFAULT_TIMEOUT,
    ) -> "ExternalScorerClient":
        argv = shlex.split(command) if isinstance(command, str) else command
        process = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        return cls(process.stdout, process.stdin, vocab, timeout, process)

    @classmethod
    def connect(
        cls,
        host: str,
        port: int,
        vocab: Vocab | None = None,
        timeout: float = DEFAULT_TIMEOUT,
    ) -> "ExternalScorerClient":
        sock = socket.create_connection((host, port), timeout=timeout)
        reader = sock.makefile("r", encoding="utf-8", newline="\n")
        writer = sock.makefile("w", encoding="utf-8", newline="\n")
        return cls(reader, writer, vocab, timeout)

    def _read_loop(self) -> None:
        try:
            first = self._reader.readline()
            if not first:
                raise ProcessExited("external scorer closed before handshake")
            try:
                hello = json.loads(first)
            except json.JSONDecodeError as exc:
                raise ProtocolError(f"bad handshake line: {first!r}") from exc
            if hello.get("hello") != PROTOCOL_NAME or hello.get("version") != PROTOCOL_VERSION:
                raise ProtocolError(f"unexpected handshake: {first.strip()!r}")
            self._handshake_done.set()
            for line in self._reader:
                line = line.strip()
                if not line:
                    continue
                self._dispatch(line)
            raise ProcessExited(self._exit_message())
        except Exception as exc:  # propagate to all waiters
            with self._lock:
                self._fatal = exc
                self._cond.notify_all()
            self._handshake_done.set()

    def _dispatch(self, line: str) -> None:
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed response line: {line!r}") from exc
        response_id = payload.get("id") if isinstance(payload, dict) else None
        with self._lock:
            if response_id not in self._pending_top_l:
                raise ProtocolError(f"response for unknown request id: {line!r}")
            top_l = self._pending_top_l.pop(response_id)
        try:
            _, prob_orig, top = decode_response(line, top_l)
            result: tuple[float, list[tuple[str, float]]] | Exception = (prob_orig, top)
        except ProtocolError as exc:
            result = exc
        with self._lock:
            self._results[response_id] = result
            self._cond.notify_all()

    def _exit_message(self) -> str:
        if self._process is not None and self._process.poll() is not None:
            return f"external scorer exited with status {self._process.returncode}"
        return "external scorer closed the connection"

    def query(
        self, tokens: list[str], mask_index: int, top_l: int, orig: str
    ) -> tuple[float, list[tuple[str, float]]]:
        """Send one request and block until its response arrives."""
        with self._lock:
            if self._fatal is not None:
                raise self._fatal
            request_id = self._next_id
            self._next_id += 1
            self._pending_top_l[request_id] = top_l
            line = encode_request(request_id, tokens, mask_index, top_l, orig)
            try:
                self._writer.write(line + "\n")
                self._writer.flush()
            except (BrokenPipeError, ValueError) as exc:
                raise ProcessExited(self._exit_message()) from exc
            deadline = time.monotonic() + self.timeout
            while request_id not in self._results:
                if self._fatal is not None:
                    raise self._fatal
                remaining = deadline - time.monotonic()
                if remaining <= 0 or not self._cond.wait(remaining):
                    raise Timeout(f"no response to request {request_id} "
                                  f"within {self.timeout}s")
            result = self._results.pop(request_id)
        if isinstance(result, Exception):
            raise result
        return result

    def roundtrip(self, masked: MaskedSeq, top_l: int) -> tuple[float, list[TokenProb]]:
        """Score the masked sequence's own token and fetch top candidates."""
        orig = masked.base.tokens[masked.mask_index].text
        prob_orig, top = self.query(masked.base.texts(), masked.mask_index, top_l, orig)
        return prob_orig, [self._token_prob(text, prob) for text, prob in top]

    def _token_prob(self, text: str, prob: float) -> TokenProb:
        token = self.vocab.token(text) if self.vocab is not None else Token(-1, text)
        return TokenProb(token, prob)

    # Scorer interface

    def prob(self, masked: MaskedSeq, token: Token) -> float:
        prob_orig, _ = self.query(masked.base.texts(), masked.mask_index, 0, token.text)
        return prob_orig

    def top_candidates(self, masked: MaskedSeq, limit: int) -> list[TokenProb]:
        if limit < 1:
            raise InvalidConfig(f"limit must be >= 1, got {limit}")
        _, top = self.roundtrip(masked, limit)
        return top

    def close(self) -> None:
        try:
            self._writer.close()
        except Exception:
            pass
        if self._process is not None:
            try:
                self._process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._process.kill()
                self._process.wait()

    def __enter__(self) -> "ExternalScorerClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
