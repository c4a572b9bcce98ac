"""Uniform LLM completion interface: live HTTP, record/replay cassettes,
and a scripted queue. Replay and scripted modes are the determinism layer
every test runs on."""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .errors import (CassetteConflict, ReplayMiss, ScriptExhausted,
                     TransportError)

MODES = ("live", "record", "replay", "scripted")
HTTP_TIMEOUT_S = 120.0
HTTP_RETRIES = 2
RETRYABLE_STATUS = {429, 500, 502, 503, 504}


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    text: str


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    attachments: tuple[str, ...] = ()  # content hashes of stored SVG artifacts
    model: str = "default"
    temperature: float = 0.0

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a chat request needs at least one message")

    def to_json(self) -> dict:
        return {
            "messages": [{"role": m.role, "text": m.text} for m in self.messages],
            "attachments": list(self.attachments),
            "model": self.model,
            "temperature": self.temperature,
        }


def canonicalize(request: ChatRequest) -> bytes:
    """Stable bytes for hashing: sorted keys, texts verbatim, attachments by
    content hash (they already are hashes)."""
    return json.dumps(request.to_json(), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


def request_key(request: ChatRequest) -> str:
    return hashlib.sha256(canonicalize(request)).hexdigest()


@dataclass
class CassetteEntry:
    key: str
    request: dict
    response: str
    recorded_at: str

    def to_json(self) -> dict:
        return {"key": self.key, "request": self.request,
                "response": self.response, "recorded_at": self.recorded_at}


def load_cassette(path: Path) -> dict[str, str]:
    """key -> response map from a JSON-Lines cassette file."""
    entries: dict[str, str] = {}
    if not path.exists():
        return entries
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            entries[raw["key"]] = raw["response"]
    return entries


class LlmGateway:
    """complete() façade over the four modes.

    record mode wraps a transport callable (an HTTP client by default, or an
    injected function when building fixtures) and appends each new
    request/response pair to the cassette; re-recording a key with a
    different response raises instead of silently drifting.
    """

    def __init__(self, mode: str, *, cassette_path: str | Path | None = None,
                 script: list[str] | None = None, endpoint: str | None = None,
                 api_key: str | None = None, transport=None):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.mode = mode
        self.cassette_path = Path(cassette_path) if cassette_path else None
        self._lock = threading.Lock()
        self._script = deque(script or [])
        self._endpoint = endpoint or os.environ.get("LLM_ENDPOINT", "")
        self._api_key = api_key or os.environ.get("LLM_API_KEY", "")
        self._transport = transport
        self._entries: dict[str, str] = {}
        if mode in ("record", "replay"):
            if self.cassette_path is None:
                raise ValueError(f"{mode} mode requires a cassette path")
            self._entries = load_cassette(self.cassette_path)

    @classmethod
    def from_env(cls) -> "LlmGateway":
        mode = os.environ.get("LLM_MODE", "replay")
        cassette = os.environ.get("LLM_CASSETTE")
        return cls(mode, cassette_path=cassette)

    def complete(self, request: ChatRequest) -> str:
        if self.mode == "scripted":
            with self._lock:
                if not self._script:
                    raise ScriptExhausted()
                return self._script.popleft()
        if self.mode == "replay":
            key = request_key(request)
            try:
                return self._entries[key]
            except KeyError:
                first = request.messages[0].text[:80]
                raise ReplayMiss(key, f"no cassette entry for key {key} "
                                      f"(first message: {first!r})") from None
        # live / record
        if self.mode == "record" and request.temperature != 0:
            raise ValueError("record mode requires temperature 0")
        response = self._call_transport(request)
        if self.mode == "record":
            self._persist(request, response)
        return response

    def _call_transport(self, request: ChatRequest) -> str:
        if self._transport is not None:
            return self._transport(request)
        return _http_complete(request, self._endpoint, self._api_key)

    def _persist(self, request: ChatRequest, response: str):
        key = request_key(request)
        with self._lock:
            if key in self._entries:
                if self._entries[key] != response:
                    raise CassetteConflict(key)
                return
            self._entries[key] = response
            entry = CassetteEntry(key=key, request=request.to_json(),
                                  response=response,
                                  recorded_at=time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                                            time.gmtime()))
            self.cassette_path.parent.mkdir(parents=True, exist_ok=True)
            with self.cassette_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry.to_json(), ensure_ascii=False) + "\n")


def _http_complete(request: ChatRequest, endpoint: str, api_key: str) -> str:
    """OpenAI-compatible chat completion over HTTPS with bounded retries."""
    import httpx  # imported lazily so offline modes never touch it

    if not endpoint:
        raise TransportError("LLM_ENDPOINT is not configured", reason="no-endpoint")
    payload = {
        "model": request.model,
        "temperature": request.temperature,
        "messages": [{"role": m.role, "content": m.text} for m in request.messages],
    }
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    delay = 1.0
    last = "unknown"
    for attempt in range(HTTP_RETRIES + 1):
        try:
            resp = httpx.post(endpoint, json=payload, headers=headers,
                              timeout=HTTP_TIMEOUT_S)
        except httpx.TimeoutException:
            last = "timeout"
        except httpx.HTTPError as exc:
            last = f"transport: {exc}"
        else:
            if resp.status_code == 200:
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            last = f"status {resp.status_code}"
            if resp.status_code not in RETRYABLE_STATUS:
                break
        if attempt < HTTP_RETRIES:
            time.sleep(delay)
            delay *= 2
    reason = "timeout" if last == "timeout" else "http"
    raise TransportError(f"completion failed after retries ({last})", reason=reason)
