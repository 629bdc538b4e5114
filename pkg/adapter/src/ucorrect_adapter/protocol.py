"""Serve loop for the ucorrect scorer wire protocol.

One JSON object per line over stdio or TCP: requests carry
{id, tokens, mask_index, top_l, orig}; responses {id, prob_orig, top}.
Malformed input never kills the process; it yields {id, error} objects.
Pending requests are drained and handed to the backend in batches, and
responses are written in batch order (the protocol matches by id, so
ordering is free to differ from arrival).
"""

from __future__ import annotations

import json
import queue
import socket
import threading
from dataclasses import dataclass
from typing import IO

HANDSHAKE = '{"hello":"ucorrect-scorer","version":1}'


@dataclass(frozen=True)
class Request:
    id: int
    tokens: list[str]
    mask_index: int
    top_l: int
    orig: str


class RequestError(Exception):
    def __init__(self, request_id, message: str):
        self.request_id = request_id
        super().__init__(message)


def parse_request(line: str) -> Request:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RequestError(None, f"malformed request line: {exc}") from exc
    if not isinstance(payload, dict):
        raise RequestError(None, "request is not an object")
    request_id = payload.get("id")
    if not isinstance(request_id, int):
        raise RequestError(None, "request id missing or not an integer")
    tokens = payload.get("tokens")
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise RequestError(request_id, "tokens must be a list of strings")
    mask_index = payload.get("mask_index")
    if not isinstance(mask_index, int) or not 0 <= mask_index < len(tokens):
        raise RequestError(request_id, f"mask_index out of range: {mask_index!r}")
    top_l = payload.get("top_l", 0)
    if not isinstance(top_l, int) or top_l < 0:
        raise RequestError(request_id, f"top_l must be a non-negative integer")
    orig = payload.get("orig")
    if not isinstance(orig, str):
        raise RequestError(request_id, "orig must be a string")
    return Request(request_id, tokens, mask_index, top_l, orig)


def encode_response(request_id: int, prob_orig: float, top: list[tuple[str, float]]) -> str:
    payload = {
        "id": request_id,
        "prob_orig": prob_orig,
        "top": [[text, prob] for text, prob in top],
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def encode_error(request_id, message: str) -> str:
    return json.dumps(
        {"id": request_id, "error": message}, ensure_ascii=False, separators=(",", ":")
    )


def _drain(lines: "queue.Queue[str | None]", max_batch: int) -> list[str] | None:
    """Block for the first pending line, then grab whatever else is waiting."""
    first = lines.get()
    if first is None:
        return None
    batch = [first]
    while len(batch) < max_batch:
        try:
            item = lines.get_nowait()
        except queue.Empty:
            break
        if item is None:
            lines.put(None)  # re-post EOF for the next drain
            break
        batch.append(item)
    return batch


def serve_stream(backend, reader: IO[str], writer: IO[str], max_batch: int = 16) -> None:
    """Handshake, then answer requests until EOF on the reader."""
    writer.write(HANDSHAKE + "\n")
    writer.flush()

    lines: "queue.Queue[str | None]" = queue.Queue()

    def pump() -> None:
        for raw in reader:
            stripped = raw.strip()
            if stripped:
                lines.put(stripped)
        lines.put(None)

    threading.Thread(target=pump, daemon=True).start()

    while True:
        batch = _drain(lines, max_batch)
        if batch is None:
            break
        # Parse the whole batch first so the backend can score it in bulk,
        # but write outputs in arrival order: the transcript is then a pure
        # function of the input lines, independent of batch boundaries.
        parsed: list[Request | RequestError] = []
        for line in batch:
            try:
                parsed.append(parse_request(line))
            except RequestError as exc:
                parsed.append(exc)
        requests = [p for p in parsed if isinstance(p, Request)]
        results = iter(backend.score_batch(requests) if requests else [])
        for item in parsed:
            if isinstance(item, RequestError):
                writer.write(encode_error(item.request_id, str(item)) + "\n")
            else:
                prob_orig, top = next(results)
                writer.write(encode_response(item.id, prob_orig, top) + "\n")
        writer.flush()


def serve_tcp(backend, port: int, max_batch: int = 16, connections: int | None = None) -> None:
    """Accept connections serially on localhost; serve each until it closes."""
    with socket.create_server(("127.0.0.1", port)) as server:
        served = 0
        while connections is None or served < connections:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("r", encoding="utf-8", newline="\n")
                writer = conn.makefile("w", encoding="utf-8", newline="\n")
                serve_stream(backend, reader, writer, max_batch)
            served += 1
