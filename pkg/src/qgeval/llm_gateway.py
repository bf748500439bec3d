"""Uniform chat-completion access with a write-once disk cache.

Two providers speak the same minimal wire shape (one user message in, text
out): an HTTP adapter for OpenAI-style chat-completion endpoints, and a
deterministic mock for offline runs. The gateway layers retries with
exponential backoff, a concurrent-request bound, an optional total request
budget, and a content-addressed response cache on top of either provider.

Retry count and backoff are plumbing defaults (3 attempts, base 0.5 s), not
part of any published protocol.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests


class GatewayError(Exception):
    """Base class for provider and cache failures."""


class AuthError(GatewayError):
    """Credential missing or rejected by the provider."""


class RateLimitExhausted(GatewayError):
    """The configured total request budget has been spent."""


class ProviderError(GatewayError):
    """Provider call failed; ``retryable`` marks transient failures."""

    def __init__(self, message: str, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class FixtureMissing(GatewayError):
    """The mock provider has no fixture for this request."""


class CacheCorrupt(GatewayError):
    """A stored cache record failed its integrity check."""


@dataclass(frozen=True)
class ModelConfig:
    provider_id: str
    model_name: str
    temperature: float | None = None  # None = provider default
    max_output_tokens: int = 1024
    endpoint: str = ""
    credential_ref: str = ""

    def __post_init__(self) -> None:
        if self.temperature is not None and self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be > 0")


@dataclass(frozen=True)
class CompletionRequest:
    config: ModelConfig
    prompt: str
    run_index: int = 0  # distinguishes repeated samples of the same prompt

    def __post_init__(self) -> None:
        if self.run_index < 0:
            raise ValueError("run_index must be >= 0")


@dataclass(frozen=True)
class CacheKey:
    digest: str


def cache_key(request: CompletionRequest) -> CacheKey:
    """Content address of a request: SHA-256 over its canonical serialization."""
    canonical = json.dumps(
        {
            "provider_id": request.config.provider_id,
            "model_name": request.config.model_name,
            "temperature": request.config.temperature,
            "prompt": request.prompt,
            "run_index": request.run_index,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return CacheKey(hashlib.sha256(canonical.encode("utf-8")).hexdigest())


class MockProvider:
    """Deterministic provider backed by fixtures; instrumented for tests.

    Fixtures are either a directory of ``<digest>.txt`` files (digest =
    cache_key of the request) or an ordered manifest list of
    ``{"contains": ..., "response": ...}`` entries checked against the prompt
    in file order, first match wins.
    """

    def __init__(
        self,
        fixtures_dir: Path | None = None,
        manifest: list[dict] | None = None,
        delay: float = 0.0,
    ):
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else None
        self.manifest = manifest
        self.delay = delay
        self.calls = 0
        self.max_in_flight = 0
        self._in_flight = 0
        self._lock = threading.Lock()

    @classmethod
    def from_path(cls, path: str | Path) -> "MockProvider":
        p = Path(path)
        if p.is_dir():
            return cls(fixtures_dir=p)
        entries = json.loads(p.read_text(encoding="utf-8"))
        if not isinstance(entries, list):
            raise ValueError(f"{p}: manifest must be a JSON list of {{contains, response}} entries")
        return cls(manifest=entries)

    def complete(self, request: CompletionRequest) -> str:
        with self._lock:
            self.calls += 1
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
        try:
            if self.delay:
                time.sleep(self.delay)
            return self._lookup(request)
        finally:
            with self._lock:
                self._in_flight -= 1

    def _lookup(self, request: CompletionRequest) -> str:
        if self.fixtures_dir is not None:
            path = self.fixtures_dir / f"{cache_key(request).digest}.txt"
            if not path.exists():
                raise FixtureMissing(f"no fixture file {path.name} for run {request.run_index}")
            return path.read_text(encoding="utf-8")
        if self.manifest is not None:
            for entry in self.manifest:
                if entry["contains"] in request.prompt:
                    return entry["response"]
            raise FixtureMissing("no manifest entry matches the prompt")
        raise FixtureMissing("mock provider has no fixtures configured")


class HttpChatProvider:
    """Adapter for OpenAI-compatible chat-completion endpoints.

    Sends a single user message; the bearer credential is read from the
    environment variable named by ``config.credential_ref``.
    """

    def __init__(self, session: requests.Session | None = None, timeout: float = 60.0):
        self._session = session or requests.Session()
        self.timeout = timeout

    def complete(self, request: CompletionRequest) -> str:
        cfg = request.config
        if not cfg.endpoint:
            raise ProviderError(f"provider {cfg.provider_id!r} has no endpoint configured")
        token = os.environ.get(cfg.credential_ref, "") if cfg.credential_ref else ""
        if not token:
            raise AuthError(f"credential {cfg.credential_ref!r} not set in the environment")
        payload: dict = {
            "model": cfg.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": cfg.max_output_tokens,
        }
        if cfg.temperature is not None:
            payload["temperature"] = cfg.temperature
        try:
            resp = self._session.post(
                cfg.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {token}"},
                timeout=self.timeout,
            )
        except requests.RequestException as err:
            raise ProviderError(f"request failed: {err}", retryable=True) from err
        if resp.status_code in (401, 403):
            raise AuthError(f"provider rejected credential (HTTP {resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise ProviderError(f"transient provider failure (HTTP {resp.status_code})", retryable=True)
        if resp.status_code != 200:
            raise ProviderError(f"provider returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as err:
            raise ProviderError(f"malformed provider response: {err}") from err


class ResponseCache:
    """Disk cache: one JSON record per key at ``root/<2 hex>/<digest>.json``.

    Entries are write-once; an existing record is never overwritten. Writes
    are atomic (temp file + rename) so concurrent readers never see partial
    records.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: CacheKey) -> Path:
        return self.root / key.digest[:2] / f"{key.digest}.json"

    def get(self, key: CacheKey) -> str | None:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            record = json.loads(path.read_text(encoding="utf-8"))
        except (ValueError, OSError) as err:
            raise CacheCorrupt(f"{path}: unreadable record ({err})") from err
        if record.get("digest") != key.digest or "response" not in record:
            raise CacheCorrupt(f"{path}: record does not match its key")
        return record["response"]

    def put(self, key: CacheKey, request: CompletionRequest, response: str) -> None:
        path = self._path(key)
        if path.exists():  # write-once
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        record = {
            "digest": key.digest,
            "request": {
                "provider_id": request.config.provider_id,
                "model_name": request.config.model_name,
                "temperature": request.config.temperature,
                "run_index": request.run_index,
                "prompt_sha256": hashlib.sha256(request.prompt.encode("utf-8")).hexdigest(),
                "prompt_preview": request.prompt[:120],
            },
            "response": response,
            "timestamp": time.time(),
        }
        tmp = path.with_suffix(f".tmp.{os.getpid()}.{threading.get_ident()}")
        tmp.write_text(json.dumps(record, ensure_ascii=False), encoding="utf-8")
        os.replace(tmp, path)

    def stats(self) -> dict:
        files = list(self.root.glob("*/*.json"))
        return {"entries": len(files), "bytes": sum(f.stat().st_size for f in files)}

    def clear(self) -> int:
        files = list(self.root.glob("*/*.json"))
        for f in files:
            f.unlink()
        return len(files)


@dataclass
class GatewayLimits:
    max_concurrent: int = 4
    max_requests: int | None = None  # total provider-call budget; None = unlimited
    retry_attempts: int = 3
    backoff_base: float = 0.5

    def __post_init__(self) -> None:
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")


class Gateway:
    """Provider access with retries, concurrency bounds, budget, and caching."""

    def __init__(
        self,
        provider,
        cache: ResponseCache | None = None,
        limits: GatewayLimits | None = None,
        sleep=time.sleep,
    ):
        self.provider = provider
        self.cache = cache
        self.limits = limits or GatewayLimits()
        self._sleep = sleep
        self._sem = threading.BoundedSemaphore(self.limits.max_concurrent)
        self._lock = threading.Lock()
        self.provider_calls = 0
        self.cache_hits = 0

    def _spend_budget(self) -> None:
        with self._lock:
            if self.limits.max_requests is not None and self.provider_calls >= self.limits.max_requests:
                raise RateLimitExhausted(f"request budget of {self.limits.max_requests} spent")
            self.provider_calls += 1

    def complete(self, request: CompletionRequest) -> str:
        """Call the provider, retrying transient failures with exponential backoff."""
        attempt = 0
        while True:
            self._spend_budget()
            with self._sem:
                try:
                    return self.provider.complete(request)
                except ProviderError as err:
                    if not err.retryable or attempt >= self.limits.retry_attempts:
                        raise
            self._sleep(self.limits.backoff_base * (2**attempt))
            attempt += 1

    def cached_complete(self, request: CompletionRequest) -> str:
        """Return the cached response for this request, calling the provider on a miss."""
        key = cache_key(request)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                with self._lock:
                    self.cache_hits += 1
                return hit
        text = self.complete(request)
        if self.cache is not None:
            self.cache.put(key, request, text)
        return text
