"""Chat-completion gateway.

Speaks the common chat wire protocol: POST {base_url}/chat/completions
with {model, messages, temperature, max_tokens}, reply content read from
choices[0].message.content. The API key comes from the environment at
call time and is never stored on any object that could be serialized.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass

import httpx

from .errors import GatewayError, InvalidInput

DEFAULT_KEY_ENV = "SANDPIPER_GATEWAY_KEY"


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise InvalidInput(f"unknown chat role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if not self.messages:
            raise InvalidInput("chat request needs at least one message")

    def to_wire(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class ChatReply:
    content: str
    model: str
    token_usage: int
    latency_ms: float


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str
    allowed_models: tuple[str, ...]
    api_key_env: str = DEFAULT_KEY_ENV
    timeout_s: float = 30.0
    max_attempts: int = 3  # total tries per request, transient failures only
    retry_backoff_s: float = 0.5

    def __post_init__(self):
        if not self.base_url:
            raise InvalidInput("provider base_url is required")
        if self.max_attempts < 1:
            raise InvalidInput("max_attempts must be at least 1")


class HttpProvider:
    """Real gateway client with bounded retry on transient failures."""

    is_mock = False

    def __init__(self, config: ProviderConfig):
        self.config = config

    def _check(self, request: ChatRequest) -> str:
        if request.model not in self.config.allowed_models:
            raise GatewayError(
                f"model {request.model!r} is not in the allowlist",
                code="model_not_allowed",
                details={"allowed": list(self.config.allowed_models)},
            )
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise GatewayError(
                f"no API key in ${self.config.api_key_env}",
                code="auth_failure",
            )
        return key

    def complete(self, request: ChatRequest) -> ChatReply:
        key = self._check(request)
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {key}"}
        started = time.monotonic()
        last_exc: Exception | None = None
        for attempt in range(self.config.max_attempts):
            if attempt:
                time.sleep(self.config.retry_backoff_s * (2 ** (attempt - 1)))
            try:
                resp = httpx.post(url, json=request.to_wire(), headers=headers,
                                  timeout=self.config.timeout_s)
            except httpx.TimeoutException as exc:
                last_exc = exc
                continue
            except httpx.HTTPError as exc:
                last_exc = exc
                continue
            if resp.status_code in (401, 403):
                raise GatewayError(
                    f"provider rejected credentials (HTTP {resp.status_code})",
                    code="auth_failure",
                )
            if resp.status_code == 429 or resp.status_code >= 500:
                last_exc = GatewayError(
                    f"provider returned HTTP {resp.status_code}",
                    code="transport_failure",
                )
                continue
            if resp.status_code >= 400:
                raise GatewayError(
                    f"provider returned HTTP {resp.status_code}",
                    code="transport_failure",
                )
            return self._parse(request, resp, started)
        raise GatewayError(
            f"gave up after {self.config.max_attempts} attempts: {last_exc}",
            code="transport_failure",
        )

    def _parse(self, request: ChatRequest, resp: httpx.Response, started: float) -> ChatReply:
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
            if not isinstance(content, str):
                raise TypeError("content is not a string")
        except Exception as exc:
            raise GatewayError(
                f"could not read reply content: {exc}",
                code="malformed_provider_response",
            ) from exc
        usage = 0
        if isinstance(data.get("usage"), dict):
            raw = data["usage"].get("total_tokens", 0)
            usage = raw if isinstance(raw, int) else 0
        return ChatReply(
            content=content,
            model=request.model,
            token_usage=usage,
            latency_ms=(time.monotonic() - started) * 1000.0,
        )


class MockProvider:
    """Scripted provider for offline runs and tests.

    Replies are served in order; after the script is exhausted the last
    entry repeats. An entry that is an Exception is raised instead.
    Thread safe, and keeps every request it saw for assertions.
    """

    is_mock = True

    def __init__(self, script: list, model: str = "mock"):
        if not script:
            raise InvalidInput("mock script needs at least one entry")
        self.script = list(script)
        self.model = model
        self.requests: list[ChatRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatReply:
        with self._lock:
            position = len(self.requests)
            self.requests.append(request)
        entry = self.script[min(position, len(self.script) - 1)]
        if isinstance(entry, Exception):
            raise entry
        content = str(entry)
        return ChatReply(
            content=content,
            model=request.model,
            token_usage=max(1, len(content) // 4),
            latency_ms=0.0,
        )
