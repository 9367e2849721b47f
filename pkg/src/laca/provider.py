"""Chat-completion providers: live HTTP, scripted stubs, and record/replay.

The wire protocol is the OpenAI-compatible ``POST {base}/v1/chat/completions``
JSON exchange, with a configurable base URL so any compatible server works.
Requests are identified by the sha256 of their canonical JSON (sorted keys,
no insignificant whitespace, UTF-8), which makes cassettes portable: a
recorded run can be replayed bit-for-bit with no network at all.

Retry policy for the HTTP provider: up to 3 retries on rate limits, 5xx
responses, and transport errors, with backoff bases of 1s/2s/4s and full
jitter (each sleep is uniform in [0, base)); per-request timeout 60s.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import requests

from .errors import (
    MalformedResponse,
    NetworkError,
    ParseError,
    RateLimited,
    ReplayMiss,
)

DEFAULT_API_BASE = "https://api.openai.com"
API_KEY_ENV = "LACA_API_KEY"
API_BASE_ENV = "LACA_API_BASE"


@dataclass(frozen=True)
class CompletionRequest:
    """One chat completion call; exactly one user message in this package."""

    model: str
    messages: tuple[dict[str, str], ...]
    temperature: float = 0.0
    max_tokens: int | None = None


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    latency_seconds: float
    usage: dict[str, int] | None = None


def user_request(
    model: str, prompt: str, temperature: float = 0.0, max_tokens: int | None = None
) -> CompletionRequest:
    """Build the single-user-message request this package always sends."""
    return CompletionRequest(
        model=model,
        messages=({"role": "user", "content": prompt},),
        temperature=temperature,
        max_tokens=max_tokens,
    )


def request_payload(request: CompletionRequest) -> dict:
    """Wire payload; max_tokens is included only when set."""
    payload: dict = {
        "model": request.model,
        "messages": [dict(m) for m in request.messages],
        "temperature": request.temperature,
    }
    if request.max_tokens is not None:
        payload["max_tokens"] = request.max_tokens
    return payload


def canonical_request_json(request: CompletionRequest) -> str:
    """Canonical JSON: sorted keys, tight separators, raw UTF-8."""
    return json.dumps(
        request_payload(request), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    )


def request_hash(request: CompletionRequest) -> str:
    return hashlib.sha256(canonical_request_json(request).encode("utf-8")).hexdigest()


class Provider(Protocol):
    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


class ScriptedProvider:
    """Deterministic stub: answers from a callable on the request."""

    def __init__(
        self,
        script: Callable[[CompletionRequest], str],
        latency_seconds: float = 0.0,
    ):
        self._script = script
        self._latency = latency_seconds

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        return CompletionResponse(text=self._script(request), latency_seconds=self._latency)


class HttpProvider:
    """Live client for any OpenAI-compatible chat completion server."""

    def __init__(
        self,
        base_url: str = DEFAULT_API_BASE,
        api_key: str = "",
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff_seconds: tuple[float, ...] = (1.0, 2.0, 4.0),
        sleep: Callable[[float], None] = time.sleep,
        rand: random.Random | None = None,
        session: requests.Session | None = None,
    ):
        self._url = base_url.rstrip("/") + "/v1/chat/completions"
        self._api_key = api_key
        self._timeout = timeout
        self._max_retries = max_retries
        self._backoff = backoff_seconds
        self._sleep = sleep
        self._rand = rand if rand is not None else random.Random()
        self._session = session if session is not None else requests.Session()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = request_payload(request)

        last_error: Exception | None = None
        rate_limited = False
        for attempt in range(self._max_retries + 1):
            if attempt > 0:
                base = self._backoff[min(attempt - 1, len(self._backoff) - 1)]
                self._sleep(self._rand.uniform(0.0, base))
            started = time.monotonic()
            try:
                http = self._session.post(
                    self._url, json=payload, headers=headers, timeout=self._timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                rate_limited = False
                continue
            latency = time.monotonic() - started
            if http.status_code == 429:
                last_error = NetworkError(f"rate limited: {http.status_code}")
                rate_limited = True
                continue
            if http.status_code >= 500:
                last_error = NetworkError(f"server error: {http.status_code}")
                rate_limited = False
                continue
            if http.status_code != 200:
                raise NetworkError(f"request failed with status {http.status_code}: {http.text[:200]}")
            return _parse_payload(http, latency)

        if rate_limited:
            raise RateLimited(f"rate limited after {self._max_retries} retries")
        raise NetworkError(f"request failed after {self._max_retries} retries: {last_error}")


def _parse_payload(http: requests.Response, latency: float) -> CompletionResponse:
    try:
        body = http.json()
        text = body["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"cannot extract completion text: {exc!r}") from exc
    if not isinstance(text, str):
        raise MalformedResponse("completion text is not a string")
    usage = None
    raw_usage = body.get("usage")
    if isinstance(raw_usage, dict):
        usage = {
            k: int(v)
            for k, v in raw_usage.items()
            if k in ("prompt_tokens", "completion_tokens") and isinstance(v, int)
        }
    return CompletionResponse(text=text, latency_seconds=latency, usage=usage or None)


@dataclass
class Cassette:
    """Recorded responses keyed by request hash."""

    entries: dict[str, CompletionResponse] = field(default_factory=dict)
    requests_json: dict[str, str] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def load(cls, path: str | Path) -> "Cassette":
        path = Path(path)
        cassette = cls()
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise ParseError(f"cannot read cassette: {exc}", path=str(path)) from exc
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                digest = str(raw["hash"])
                response = raw["response"]
                cassette.entries[digest] = CompletionResponse(
                    text=str(response["text"]),
                    latency_seconds=float(response["latency_seconds"]),
                    usage=response.get("usage"),
                )
                cassette.requests_json[digest] = json.dumps(
                    raw["request"], sort_keys=True, separators=(",", ":"), ensure_ascii=False
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad cassette entry: {exc!r}", path=str(path), line=lineno) from exc
        return cassette

    def get(self, digest: str) -> CompletionResponse | None:
        return self.entries.get(digest)

    def put(self, digest: str, request_json: str, response: CompletionResponse) -> None:
        with self._lock:
            self.entries[digest] = response
            self.requests_json[digest] = request_json

    def save(self, path: str | Path) -> None:
        with self._lock:
            lines = [
                _entry_line(digest, self.requests_json[digest], response)
                for digest, response in self.entries.items()
            ]
        Path(path).write_text("".join(lines), encoding="utf-8")


def _entry_line(digest: str, request_json: str, response: CompletionResponse) -> str:
    record = {
        "hash": digest,
        "request": json.loads(request_json),
        "response": {
            "text": response.text,
            "latency_seconds": response.latency_seconds,
            "usage": response.usage,
        },
    }
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


class ReplayProvider:
    """Hermetic provider: serves only recorded responses, never the network."""

    def __init__(self, cassette: Cassette):
        self._cassette = cassette

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        digest = request_hash(request)
        response = self._cassette.get(digest)
        if response is None:
            raise ReplayMiss(digest)
        return response


class RecordingProvider:
    """Wraps any provider and appends each successful response to a cassette."""

    def __init__(self, inner: Provider, cassette: Cassette, path: str | Path | None = None):
        self._inner = inner
        self._cassette = cassette
        self._path = Path(path) if path is not None else None
        self._file_lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        digest = request_hash(request)
        response = self._inner.complete(request)
        request_json = canonical_request_json(request)
        self._cassette.put(digest, request_json, response)
        if self._path is not None:
            line = _entry_line(digest, request_json, response)
            with self._file_lock, open(self._path, "a", encoding="utf-8") as fh:
                fh.write(line)
        return response


def cassette_file_hash(path: str | Path) -> str:
    """sha256 of the cassette file bytes, recorded in run manifests."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
