"""Completion providers: a remote chat-completion client and a transcript replayer."""
from __future__ import annotations

import json
import logging
import os
import socket
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from urllib.error import HTTPError, URLError
from urllib.request import Request, urlopen

from .prompts import GENERATE, REPAIR, Prompt, ProviderResponse

log = logging.getLogger(__name__)

API_KEY_ENV = "CHIRAAG_API_KEY"
_TRANSIENT_STATUS = {408, 429, 500, 502, 503, 504}


class ProviderError(Exception):
    pass


class ProviderTimeout(ProviderError):
    pass


class ProviderRejected(ProviderError):
    def __init__(self, status: int, body: str):
        super().__init__(f"provider rejected request: HTTP {status}: {body}")
        self.status = status
        self.body = body


class TranscriptExhausted(ProviderError):
    pass


class CompletionProvider:
    provider_id = "abstract"

    def complete(self, prompt: Prompt) -> str:
        raise NotImplementedError


@dataclass
class RemoteProvider(CompletionProvider):
    """OpenAI-style ``/chat/completions`` client over plain HTTP(S)."""
    endpoint: str
    model: str
    api_key: Optional[str] = None
    timeout_ms: int = 60_000
    max_retries: int = 2
    temperature: Optional[float] = 0.0
    backoff_s: float = 0.5
    provider_id: str = "remote"

    def complete(self, prompt: Prompt) -> str:
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": prompt.system_preamble},
                {"role": "user", "content": prompt.user_message},
            ],
        }
        if self.temperature is not None:
            payload["temperature"] = self.temperature
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        data = json.dumps(payload).encode("utf-8")
        last: Exception = ProviderTimeout("no attempt made")
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_s * 2 ** (attempt - 1))
            try:
                req = Request(self.endpoint, data=data, headers=headers, method="POST")
                with urlopen(req, timeout=self.timeout_ms / 1000) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                return _content(body)
            except HTTPError as exc:
                excerpt = exc.read().decode("utf-8", errors="replace")[:200]
                if exc.code not in _TRANSIENT_STATUS:
                    raise ProviderRejected(exc.code, excerpt) from None
                last = ProviderRejected(exc.code, excerpt)
            except (socket.timeout, TimeoutError) as exc:
                last = ProviderTimeout(f"no reply within {self.timeout_ms} ms ({exc})")
            except URLError as exc:
                if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                    last = ProviderTimeout(f"no reply within {self.timeout_ms} ms")
                else:
                    last = ProviderTimeout(f"transport failure: {exc.reason}")
            log.warning("provider attempt %d failed: %s", attempt + 1, last)
        raise last


def _content(body: dict) -> str:
    try:
        return body["choices"][0]["message"]["content"] or ""
    except (KeyError, IndexError, TypeError):
        raise ProviderRejected(200, json.dumps(body)[:200]) from None


@dataclass
class ReplayProvider(CompletionProvider):
    """Hands out transcript entries in order; each run needs its own instance."""
    entries: list
    provider_id: str = "replay"
    cursor: int = field(default=0)

    @classmethod
    def from_file(cls, path) -> "ReplayProvider":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValueError(f"{path}: transcript must be an array")
        for i, entry in enumerate(data):
            if not isinstance(entry, dict) or entry.get("purpose") not in (GENERATE, REPAIR) \
                    or not isinstance(entry.get("text"), str):
                raise ValueError(f"{path}: entry {i} needs purpose generate|repair and text")
        return cls(data)

    def complete(self, prompt: Prompt) -> str:
        if self.cursor >= len(self.entries):
            raise TranscriptExhausted(f"transcript has {len(self.entries)} entries; call {self.cursor + 1} has none")
        entry = self.entries[self.cursor]
        self.cursor += 1
        if entry["purpose"] != prompt.purpose:
            log.warning("transcript entry %d is for %s but the prompt is %s",
                        self.cursor - 1, entry["purpose"], prompt.purpose)
        return entry["text"]


def complete(prompt: Prompt, provider: CompletionProvider) -> ProviderResponse:
    start = time.perf_counter()
    text = provider.complete(prompt)
    latency = (time.perf_counter() - start) * 1000
    return ProviderResponse(text, provider.provider_id, latency)


def api_key_from_env() -> Optional[str]:
    return os.environ.get(API_KEY_ENV)
