"""LLM gateway: rendering, retries, audit logging, backends.

All pipeline stages talk to the model through :class:`LlmGateway` so that
retry policy, refusal handling, and audit logging live in one place.  Audit
records are canonical JSON without timestamps, which keeps reruns
byte-identical.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Protocol

import requests

from ..config import LlmSettings
from ..errors import GatewayAuthError, LlmExhausted, LlmRefusal, TransientBackendError
from ..records import canonical_json, content_hash
from .prompts import render_prompt


@dataclass(frozen=True)
class LlmRequest:
    template_id: str
    bindings: Mapping[str, str]
    temperature: float
    max_tokens: int
    model: str


@dataclass(frozen=True)
class LlmResponse:
    text: str
    prompt: str
    attempts: int
    latency_s: float
    usage: dict = field(default_factory=dict)


class Backend(Protocol):
    """Completion transport.  Raises TransientBackendError for retryable
    faults and GatewayAuthError for credential problems."""

    def complete(self, prompt: str, request: LlmRequest) -> str: ...


class LlmGateway:
    def __init__(
        self,
        backend: Backend,
        settings: LlmSettings,
        audit_path: Path | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.backend = backend
        self.settings = settings
        self.audit_path = Path(audit_path) if audit_path is not None else None
        self._sleep = sleep
        self._lock = threading.Lock()

    def send(self, request: LlmRequest) -> LlmResponse:
        prompt = render_prompt(request.template_id, request.bindings)
        attempts: list[dict] = []
        started = time.monotonic()
        for attempt in range(1, self.settings.max_attempts + 1):
            try:
                text = self.backend.complete(prompt, request)
            except TransientBackendError as exc:
                attempts.append({"attempt": attempt, "status": "transient", "error": str(exc)})
                if attempt < self.settings.max_attempts:
                    self._sleep(self.settings.backoff_base_s * (2 ** (attempt - 1)))
                continue
            if not text.strip():
                attempts.append({"attempt": attempt, "status": "refused"})
                self._audit(request, prompt, attempts, status="refused")
                raise LlmRefusal(f"empty completion for {request.template_id}")
            attempts.append({"attempt": attempt, "status": "ok"})
            self._audit(request, prompt, attempts, status="ok", response=text)
            return LlmResponse(
                text=text,
                prompt=prompt,
                attempts=attempt,
                latency_s=time.monotonic() - started,
            )
        self._audit(request, prompt, attempts, status="exhausted")
        raise LlmExhausted(
            f"{request.template_id}: no completion after {self.settings.max_attempts} attempts"
        )

    def _audit(
        self,
        request: LlmRequest,
        prompt: str,
        attempts: list[dict],
        status: str,
        response: str | None = None,
    ) -> None:
        if self.audit_path is None:
            return
        record = {
            "template_id": request.template_id,
            "model": request.model,
            "temperature": request.temperature,
            "bindings": dict(request.bindings),
            "prompt_sha256": content_hash(prompt),
            "attempts": attempts,
            "status": status,
        }
        if response is not None:
            record["response"] = response
        line = canonical_json(record) + "\n"
        with self._lock:
            self.audit_path.parent.mkdir(parents=True, exist_ok=True)
            with self.audit_path.open("a", encoding="utf-8", newline="\n") as fh:
                fh.write(line)


class HttpBackend:
    """Chat-completions transport for any OpenAI-style endpoint.

    401/403 raise GatewayAuthError; everything else retryable maps to
    TransientBackendError so the gateway's single retry loop owns policy.
    """

    def __init__(self, settings: LlmSettings, session: requests.Session | None = None) -> None:
        self.settings = settings
        self.session = session or requests.Session()
        key = os.environ.get(settings.api_key_env, "")
        if not key:
            raise GatewayAuthError(f"environment variable {settings.api_key_env} is not set")
        self._headers = {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def complete(self, prompt: str, request: LlmRequest) -> str:
        payload = {
            "model": request.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        url = self.settings.base_url.rstrip("/") + "/chat/completions"
        try:
            resp = self.session.post(url, json=payload, headers=self._headers, timeout=120)
        except requests.RequestException as exc:
            raise TransientBackendError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise GatewayAuthError(f"backend rejected credentials ({resp.status_code})")
        if resp.status_code != 200:
            raise TransientBackendError(f"backend returned {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransientBackendError("malformed completion payload") from exc
