"""Provider transports and the content-addressed response cache.

A transport resolves a relative request path ("discover/movie?page=1") to a
parsed JSON payload.  HttpTransport talks to a live catalog API;
FixtureTransport serves checked-in JSON files so the whole pipeline runs
offline.  CachedClient wraps either one and memoises responses under
``cache/<provider>/<sha256>.json`` with atomic writes.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path
from typing import Callable, Protocol

import requests

from ..config import ProviderSettings
from ..errors import MalformedRecord, ProviderAuthError, ProviderUnavailable
from ..records import content_hash

_RETRYABLE = frozenset({408, 425, 429, 500, 502, 503, 504})


class Transport(Protocol):
    def get(self, path: str) -> object: ...


class HttpTransport:
    def __init__(
        self,
        settings: ProviderSettings,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.settings = settings
        self.session = session or requests.Session()
        self._sleep = sleep
        self._last_request = 0.0
        self._headers = {}
        if settings.api_key_env:
            key = os.environ.get(settings.api_key_env, "")
            if not key:
                raise ProviderAuthError(
                    f"{settings.name}: environment variable {settings.api_key_env} is not set"
                )
            self._headers["Authorization"] = f"Bearer {key}"

    def get(self, path: str) -> object:
        url = self.settings.base_url.rstrip("/") + "/" + path.lstrip("/")
        last_error = "no attempts made"
        for attempt in range(1, self.settings.max_retries + 1):
            self._throttle()
            try:
                resp = self.session.get(url, headers=self._headers, timeout=60)
            except requests.RequestException as exc:
                last_error = str(exc)
            else:
                if resp.status_code in (401, 403):
                    raise ProviderAuthError(f"{self.settings.name}: credentials rejected")
                if resp.status_code == 200:
                    try:
                        return resp.json()
                    except ValueError as exc:
                        raise MalformedRecord(f"{self.settings.name}: non-JSON body") from exc
                if resp.status_code not in _RETRYABLE:
                    raise ProviderUnavailable(
                        f"{self.settings.name}: unexpected status {resp.status_code}"
                    )
                last_error = f"status {resp.status_code}"
            if attempt < self.settings.max_retries:
                self._sleep(0.5 * (2 ** (attempt - 1)))
        raise ProviderUnavailable(f"{self.settings.name}: {last_error}")

    def _throttle(self) -> None:
        if self.settings.min_interval_s <= 0:
            return
        now = time.monotonic()
        wait = self.settings.min_interval_s - (now - self._last_request)
        if wait > 0:
            self._sleep(wait)
        self._last_request = time.monotonic()


def fixture_name(path: str) -> str:
    """Deterministic filename for a request path."""
    return (
        path.strip("/")
        .replace("/", "_")
        .replace("?", "__")
        .replace("=", "-")
        .replace("&", "_")
        + ".json"
    )


class FixtureTransport:
    def __init__(self, fixture_dir: Path) -> None:
        self.fixture_dir = Path(fixture_dir)

    def get(self, path: str) -> object:
        file = self.fixture_dir / fixture_name(path)
        if not file.is_file():
            raise ProviderUnavailable(f"no fixture for request {path!r} ({file.name})")
        try:
            return json.loads(file.read_text(encoding="utf-8"))
        except ValueError as exc:
            raise MalformedRecord(f"fixture {file.name} is not valid JSON") from exc


class CachedClient:
    """Memoises transport responses on disk, keyed by request path."""

    def __init__(self, transport: Transport, provider_name: str, cache_dir: Path | None) -> None:
        self.transport = transport
        self.provider_name = provider_name
        self.cache_dir = Path(cache_dir) / provider_name if cache_dir is not None else None

    def get(self, path: str) -> object:
        if self.cache_dir is None:
            return self.transport.get(path)
        entry = self.cache_dir / (content_hash(path) + ".json")
        if entry.is_file():
            return json.loads(entry.read_text(encoding="utf-8"))["response"]
        response = self.transport.get(path)
        # Key order is significant downstream (documents render stats in
        # provider order), so cache entries must not re-sort the payload.
        payload = json.dumps(
            {"path": path, "response": response}, ensure_ascii=False, separators=(",", ":")
        )
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = entry.with_suffix(".tmp")
        tmp.write_text(payload, encoding="utf-8", newline="\n")
        os.replace(tmp, entry)
        return response
