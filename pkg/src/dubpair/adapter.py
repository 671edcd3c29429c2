"""Adapter protocol for external capability sidecars (ASR, embed, denoise).

Requests and responses travel as one JSON object per line over a sidecar
process's standard streams; a deterministic in-process mock honors the same
contract so the whole pipeline runs offline. One request is in flight per
session at a time.
"""

from __future__ import annotations

import hashlib
import json
import logging
import queue
import shlex
import subprocess
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

OPS = ("asr", "embed", "denoise")
SHUTDOWN_OP = "shutdown"
DEFAULT_TIMEOUT_S = 120.0
DEFAULT_MAX_RETRIES = 2
MOCK_EMBED_DIM = 192


class AdapterError(RuntimeError):
    """A request that could not be completed; ``kind`` names the failure."""

    def __init__(self, kind: str, message: str, request_id: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.request_id = request_id


@dataclass(frozen=True)
class AdapterRequest:
    id: int
    op: str
    audio_path: str
    language: str | None = None
    params: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.op not in OPS:
            raise ValueError(f"unknown op {self.op!r}")
        if self.id < 0:
            raise ValueError("request id must be >= 0")
        object.__setattr__(self, "params", dict(self.params))


@dataclass(frozen=True)
class AdapterResponse:
    id: int
    ok: bool
    result: str | list[float] | None = None
    error: str | None = None

    def __post_init__(self) -> None:
        if self.ok != (self.result is not None):
            raise ValueError("ok responses carry a result; failures do not")
        if not self.ok and not self.error:
            raise ValueError("failed responses must carry an error message")


def encode_request(request: AdapterRequest) -> str:
    return json.dumps(
        {
            "id": request.id,
            "op": request.op,
            "audio_path": request.audio_path,
            "language": request.language,
            "params": dict(request.params),
        },
        ensure_ascii=False,
    )


def decode_response(line: str) -> AdapterResponse:
    obj = json.loads(line)
    if not isinstance(obj, dict) or "id" not in obj or "ok" not in obj:
        raise ValueError(f"response missing id/ok fields: {line!r}")
    return AdapterResponse(
        id=int(obj["id"]),
        ok=bool(obj["ok"]),
        result=obj.get("result"),
        error=obj.get("error"),
    )


def content_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _hash_embedding(digest_hex: str, dim: int) -> list[float]:
    seed = int.from_bytes(bytes.fromhex(digest_hex)[:8], "big")
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(dim)
    norm = float(np.linalg.norm(vec))
    while norm == 0.0:  # vanishing probability; loop keeps the contract exact
        vec = rng.standard_normal(dim)
        norm = float(np.linalg.norm(vec))
    return [float(v) for v in vec / norm]


class MockAdapterSession:
    """In-process adapter: ASR by fixture lookup, hash-seeded embeddings,
    pass-through denoising."""

    def __init__(self, fixtures: Mapping[str, str] | None = None, embed_dim: int = MOCK_EMBED_DIM):
        self._fixtures = dict(fixtures or {})
        self.embed_dim = embed_dim
        self._lock = threading.Lock()
        self._next_id = 0

    def next_request(
        self,
        op: str,
        audio_path: str,
        language: str | None = None,
        params: Mapping[str, str] | None = None,
    ) -> AdapterRequest:
        with self._lock:
            self._next_id += 1
            return AdapterRequest(self._next_id, op, audio_path, language, params or {})

    def call(self, request: AdapterRequest) -> AdapterResponse:
        path = Path(request.audio_path)
        if not path.is_file():
            return AdapterResponse(request.id, False, error=f"missing audio file {path}")
        digest = content_digest(path)
        if request.op == "asr":
            transcript = self._fixtures.get(digest)
            if transcript is None:
                return AdapterResponse(request.id, False, error="no fixture")
            return AdapterResponse(request.id, True, result=transcript)
        if request.op == "embed":
            return AdapterResponse(request.id, True, result=_hash_embedding(digest, self.embed_dim))
        if request.op == "denoise":
            return AdapterResponse(request.id, True, result=request.audio_path)
        return AdapterResponse(request.id, False, error=f"unknown op {request.op!r}")

    def asr(self, audio_path: str, language: str | None = None) -> AdapterResponse:
        return self.call(self.next_request("asr", audio_path, language))

    def embed(self, audio_path: str) -> AdapterResponse:
        return self.call(self.next_request("embed", audio_path))

    def denoise(self, audio_path: str) -> AdapterResponse:
        return self.call(self.next_request("denoise", audio_path))

    def close(self) -> int:
        return 0


def mock_adapter(
    fixtures: Mapping[str, str] | None = None, embed_dim: int = MOCK_EMBED_DIM
) -> MockAdapterSession:
    """Open a deterministic in-process adapter session."""
    return MockAdapterSession(fixtures, embed_dim)


class ProcessAdapterSession:
    """Adapter session backed by a sidecar subprocess speaking JSON lines."""

    def __init__(
        self,
        cmd: str | Sequence[str],
        timeout_s: float = DEFAULT_TIMEOUT_S,
        max_retries: int = DEFAULT_MAX_RETRIES,
    ):
        args = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self._next_id = 0
        self._lock = threading.Lock()
        self._proc = subprocess.Popen(
            args,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._lines: queue.SimpleQueue[str | None] = queue.SimpleQueue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def next_request(
        self,
        op: str,
        audio_path: str,
        language: str | None = None,
        params: Mapping[str, str] | None = None,
    ) -> AdapterRequest:
        with self._lock:
            self._next_id += 1
            return AdapterRequest(self._next_id, op, audio_path, language, params or {})

    def _send(self, request: AdapterRequest) -> None:
        if self._proc.poll() is not None or self._proc.stdin is None:
            raise AdapterError(
                "sidecar-exit",
                f"sidecar exited with code {self._proc.returncode}",
                request.id,
            )
        try:
            self._proc.stdin.write(encode_request(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterError("sidecar-exit", f"sidecar pipe closed: {exc}", request.id) from exc

    def _await_response(self, request_id: int, timeout_s: float) -> AdapterResponse | None:
        import time

        deadline = time.monotonic() + timeout_s
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                return None
            if line is None:
                raise AdapterError(
                    "sidecar-exit", "sidecar closed its output stream", request_id
                )
            line = line.strip()
            if not line:
                continue
            try:
                response = decode_response(line)
            except (ValueError, json.JSONDecodeError) as exc:
                logger.warning("request %d: malformed response line: %s", request_id, exc)
                continue
            if response.id != request_id:
                logger.warning(
                    "request %d: id mismatch, skipping response for id %d",
                    request_id,
                    response.id,
                )
                continue
            return response

    def call(self, request: AdapterRequest) -> AdapterResponse:
        for attempt in range(1 + self.max_retries):
            self._send(request)
            response = self._await_response(request.id, self.timeout_s)
            if response is not None:
                return response
            logger.warning(
                "request %d: timed out after %.1fs (attempt %d of %d)",
                request.id,
                self.timeout_s,
                attempt + 1,
                1 + self.max_retries,
            )
        raise AdapterError(
            "timeout",
            f"no response after {1 + self.max_retries} sends",
            request.id,
        )

    def asr(self, audio_path: str, language: str | None = None) -> AdapterResponse:
        return self.call(self.next_request("asr", audio_path, language))

    def embed(self, audio_path: str) -> AdapterResponse:
        return self.call(self.next_request("embed", audio_path))

    def denoise(self, audio_path: str) -> AdapterResponse:
        return self.call(self.next_request("denoise", audio_path))

    def close(self) -> int:
        """Request a clean shutdown; returns the sidecar's exit code."""
        if self._proc.poll() is None and self._proc.stdin is not None:
            try:
                self._proc.stdin.write(json.dumps({"op": SHUTDOWN_OP}) + "\n")
                self._proc.stdin.flush()
                self._proc.stdin.close()
            except (BrokenPipeError, OSError):
                pass
        try:
            return self._proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            return self._proc.wait()


AdapterSession = MockAdapterSession | ProcessAdapterSession


class AdapterPool:
    """A fixed pool of adapter sessions with serialized checkout/return."""

    def __init__(self, factory: Callable[[], AdapterSession], size: int):
        if size < 1:
            raise ValueError("pool size must be >= 1")
        self._sessions = [factory() for _ in range(size)]
        self._free: queue.SimpleQueue[AdapterSession] = queue.SimpleQueue()
        for session in self._sessions:
            self._free.put(session)

    @contextmanager
    def session(self):
        session = self._free.get()
        try:
            yield session
        finally:
            self._free.put(session)

    def close(self) -> None:
        for session in self._sessions:
            session.close()
