"""Chat-completion clients: live HTTP endpoint and offline mock.

Every call, live or mock, can be persisted as a transcript file keyed by
a hash of the request, which gives audit trails for live runs and
byte-identical replay for offline ones.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from pathlib import Path
from typing import Callable, Protocol

import requests

from . import mockllm

DEFAULT_API_KEY_ENV = "ROSLM_API_KEY"
DEFAULT_BASE_URL_ENV = "ROSLM_BASE_URL"


class ClientError(Exception):
    def __init__(self, message: str, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class ChatClient(Protocol):
    model: str

    def complete(self, messages: list[dict]) -> str: ...


def request_key(model: str, messages: list[dict]) -> str:
    payload = json.dumps({"model": model, "messages": messages},
                         sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class TranscriptStore:
    """One JSON file per request hash; concurrent-writer safe."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def load(self, key: str) -> str | None:
        path = self.root / f"{key}.json"
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return data["response"]["content"]

    def save(self, key: str, model: str, messages: list[dict], content: str) -> None:
        path = self.root / f"{key}.json"
        record = {
            "request": {"model": model, "messages": messages},
            "response": {"content": content},
        }
        text = json.dumps(record, indent=2, ensure_ascii=False, sort_keys=True)
        with self._lock:
            if path.exists():
                return
            tmp = path.with_suffix(".tmp")
            tmp.write_text(text, encoding="utf-8")
            tmp.replace(path)


class HttpChatClient:
    """OpenAI-style chat completions over HTTP with retry and transcripts."""

    def __init__(
        self,
        base_url: str | None = None,
        model: str = "gpt-4o-mini",
        temperature: float = 0.7,
        max_tokens: int = 2048,
        timeout: float = 60.0,
        retries: int = 3,
        api_key_env: str = DEFAULT_API_KEY_ENV,
        transcripts: TranscriptStore | None = None,
    ):
        self.base_url = (base_url or os.environ.get(DEFAULT_BASE_URL_ENV, "")).rstrip("/")
        if not self.base_url:
            raise ClientError("no base URL configured for the live LLM client")
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.timeout = timeout
        self.retries = retries
        self.api_key_env = api_key_env
        self.transcripts = transcripts
        self._session = requests.Session()

    def complete(self, messages: list[dict]) -> str:
        body = {
            "model": self.model,
            "messages": messages,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"

        last: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = self._session.post(
                    f"{self.base_url}/chat/completions",
                    json=body,
                    headers=headers,
                    timeout=self.timeout,
                )
            except requests.RequestException as exc:
                last = exc
                time.sleep(0.5 * 2**attempt)
                continue
            if resp.status_code >= 500:
                last = ClientError(f"server error {resp.status_code}", retryable=True)
                time.sleep(0.5 * 2**attempt)
                continue
            if resp.status_code >= 400:
                raise ClientError(
                    f"request rejected ({resp.status_code}): {resp.text[:200]}"
                )
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise ClientError(f"malformed completion response: {exc}") from exc
            if self.transcripts:
                self.transcripts.save(
                    request_key(self.model, messages), self.model, messages, content
                )
            return content
        raise ClientError(f"transport failure after {self.retries} attempts: {last}",
                          retryable=True)


class MockChatClient:
    """Deterministic offline client.

    A request found in the transcript directory replays verbatim; anything
    else is answered by ``responder`` (a pure function of the messages) and
    recorded, so repeat runs see identical bytes either way.
    """

    model = "mock"

    def __init__(
        self,
        transcript_dir: str | Path | None = None,
        responder: Callable[[list[dict]], str] = mockllm.respond,
    ):
        self.transcripts = TranscriptStore(transcript_dir) if transcript_dir else None
        self.responder = responder

    def complete(self, messages: list[dict]) -> str:
        key = request_key(self.model, messages)
        if self.transcripts:
            cached = self.transcripts.load(key)
            if cached is not None:
                return cached
        content = self.responder(messages)
        if self.transcripts:
            self.transcripts.save(key, self.model, messages, content)
        return content


def client_from_spec(
    spec: str,
    base_url: str | None = None,
    model: str = "gpt-4o-mini",
    temperature: float = 0.7,
    api_key_env: str = DEFAULT_API_KEY_ENV,
    transcript_dir: str | Path | None = None,
) -> ChatClient:
    """Build a client from a ``live`` / ``mock:<transcript-dir>`` flag value."""
    if spec == "live":
        store = TranscriptStore(transcript_dir) if transcript_dir else None
        return HttpChatClient(
            base_url=base_url, model=model, temperature=temperature,
            api_key_env=api_key_env, transcripts=store,
        )
    if spec == "mock" or spec.startswith("mock:"):
        _, _, path = spec.partition(":")
        return MockChatClient(transcript_dir=path or transcript_dir)
    raise ValueError(f"unknown --llm value {spec!r}; expected 'live' or 'mock:<dir>'")
