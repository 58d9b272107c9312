"""Chat-completion HTTP client with retries, rate limiting and hash logging.

Wire protocol: POST {model, messages, temperature, max_tokens} to the
endpoint URL; the reply carries choices[0].message.content. The auth token
comes from the environment and never reaches logs or manifests.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import requests

ENV_ENDPOINT = "LM_ENDPOINT"
ENV_MODEL = "LM_MODEL"
ENV_API_KEY = "LM_API_KEY"


class TransportError(RuntimeError):
    pass


class AuthError(RuntimeError):
    """Credential failure; not retried."""


@dataclass
class EndpointConfig:
    base_url: str
    model: str
    api_key: str = ""
    temperature: float = 0.7
    max_tokens: int = 2048
    timeout: float = 120.0
    retry_budget: int = 3
    backoff_base: float = 0.25
    requests_per_minute: int = 60

    @classmethod
    def from_env(cls) -> "EndpointConfig":
        url = os.environ.get(ENV_ENDPOINT, "")
        if not url:
            raise TransportError(f"{ENV_ENDPOINT} is not set")
        return cls(
            base_url=url,
            model=os.environ.get(ENV_MODEL, "default"),
            api_key=os.environ.get(ENV_API_KEY, ""),
        )


@dataclass
class RequestLog:
    """Reproducibility record: hashes by default, transcripts behind debug."""

    entries: list[dict] = field(default_factory=list)
    keep_text: bool = False

    def record(self, prompt: str, response: str) -> None:
        entry = {
            "prompt_sha256": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
            "response_sha256": hashlib.sha256(response.encode("utf-8")).hexdigest(),
        }
        if self.keep_text:
            entry["prompt"] = prompt
            entry["response"] = response
        self.entries.append(entry)


class _TokenBucket:
    def __init__(self, per_minute: int):
        self.interval = 60.0 / max(per_minute, 1)
        self.next_ok = 0.0

    def wait(self) -> None:
        now = time.monotonic()
        if now < self.next_ok:
            time.sleep(self.next_ok - now)
        self.next_ok = max(now, self.next_ok) + self.interval


def complete(prompt: str, endpoint: EndpointConfig, transport=None,
             log: RequestLog | None = None, _sleep=time.sleep) -> str:
    """Send one chat request, retrying transient failures with exponential
    backoff up to the endpoint's retry budget."""
    transport = transport or _http_post
    payload = {
        "model": endpoint.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": endpoint.temperature,
        "max_tokens": endpoint.max_tokens,
    }
    last_error: Exception | None = None
    for attempt in range(endpoint.retry_budget + 1):
        if attempt:
            _sleep(endpoint.backoff_base * (2 ** (attempt - 1)))
        try:
            data = transport(endpoint, payload)
        except TransportError as exc:
            last_error = exc
            continue
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {data!r}") from exc
        if log is not None:
            log.record(prompt, text)
        return text
    raise TransportError(
        f"transport failed after {endpoint.retry_budget + 1} attempts: {last_error}")


def _http_post(endpoint: EndpointConfig, payload: dict) -> dict:
    headers = {"Content-Type": "application/json"}
    if endpoint.api_key:
        headers["Authorization"] = f"Bearer {endpoint.api_key}"
    try:
        response = requests.post(endpoint.base_url, headers=headers,
                                 data=json.dumps(payload), timeout=endpoint.timeout)
    except requests.RequestException as exc:
        raise TransportError(f"request failed: {exc}") from exc
    if response.status_code in (401, 403):
        raise AuthError(f"authentication failed (HTTP {response.status_code})")
    if response.status_code >= 500 or response.status_code == 429:
        raise TransportError(f"server error (HTTP {response.status_code})")
    if response.status_code != 200:
        raise TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
    try:
        return response.json()
    except ValueError as exc:
        raise TransportError("response body is not JSON") from exc


class HttpBackend:
    """Backend protocol implementation over a live endpoint."""

    def __init__(self, endpoint: EndpointConfig, transport=None,
                 log: RequestLog | None = None):
        self.endpoint = endpoint
        self.transport = transport
        self.log = log or RequestLog()
        self._bucket = _TokenBucket(endpoint.requests_per_minute)

    def complete(self, prompt: str) -> str:
        self._bucket.wait()
        return complete(prompt, self.endpoint, transport=self.transport, log=self.log)
