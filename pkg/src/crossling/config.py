"""Pipeline configuration: schema, validation, and file loading.

Config files are TOML (or JSON); snapshots embedded in manifests and run
records are plain dicts produced by ``PipelineConfig.to_dict`` and accepted
back by ``validate_config``. API credentials are always read from the
environment variables *named* in the config, never from the file itself.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import tomli

from .dates import parse_date, window_start
from .errors import TemporalConflictError, ValidationError
from .records import DOMAINS

_LANG_CODE = re.compile(r"^[a-z]{2}$")

DEFAULT_WINDOW_MONTHS = 6
DEFAULT_QUESTIONS_PER_ENTITY = 6


@dataclass(frozen=True)
class ProviderSettings:
    """Endpoint and rate-limit settings for one domain provider."""

    name: str
    base_url: str = ""
    api_key_env: str = ""
    fixture_dir: str = ""
    page_size: int = 20
    min_interval_s: float = 0.0
    max_retries: int = 3

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "base_url": self.base_url,
            "api_key_env": self.api_key_env,
            "fixture_dir": self.fixture_dir,
            "page_size": self.page_size,
            "min_interval_s": self.min_interval_s,
            "max_retries": self.max_retries,
        }


@dataclass(frozen=True)
class LlmSettings:
    """Chat-completion endpoint settings shared by all model calls."""

    backend: str = "mock"
    base_url: str = ""
    api_key_env: str = ""
    model: str = "gpt-4o-mini"
    judge_model: str = ""  # empty: same endpoint/model as generation
    temperature_generate: float = 0.7
    temperature_judge: float = 0.0
    temperature_translate: float = 0.0
    max_attempts: int = 4
    backoff_base_s: float = 0.5
    max_tokens: int = 2048
    mock_known_entities: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "base_url": self.base_url,
            "api_key_env": self.api_key_env,
            "model": self.model,
            "judge_model": self.judge_model,
            "temperature_generate": self.temperature_generate,
            "temperature_judge": self.temperature_judge,
            "temperature_translate": self.temperature_translate,
            "max_attempts": self.max_attempts,
            "backoff_base_s": self.backoff_base_s,
            "max_tokens": self.max_tokens,
            "mock_known_entities": list(self.mock_known_entities),
        }


@dataclass(frozen=True)
class PipelineConfig:
    target_model_id: str
    knowledge_cutoff: dt.date
    time_range: tuple[dt.date, dt.date]
    languages: tuple[str, ...]
    domains: tuple[str, ...]
    entities_per_domain: int
    questions_per_entity: int = DEFAULT_QUESTIONS_PER_ENTITY
    window_months: int = DEFAULT_WINDOW_MONTHS
    seed: int = 0
    cache_dir: str = "cache"
    providers: Mapping[str, ProviderSettings] = field(default_factory=dict)
    llm: LlmSettings = field(default_factory=LlmSettings)

    @property
    def pivot_language(self) -> str:
        return self.languages[0]

    @property
    def target_languages(self) -> tuple[str, ...]:
        return self.languages[1:]

    @property
    def earliest_admissible(self) -> dt.date:
        return window_start(self.knowledge_cutoff, self.window_months)

    def to_dict(self) -> dict:
        return {
            "target_model_id": self.target_model_id,
            "knowledge_cutoff": self.knowledge_cutoff.isoformat(),
            "time_range": [self.time_range[0].isoformat(), self.time_range[1].isoformat()],
            "languages": list(self.languages),
            "domains": list(self.domains),
            "entities_per_domain": self.entities_per_domain,
            "questions_per_entity": self.questions_per_entity,
            "window_months": self.window_months,
            "seed": self.seed,
            "cache_dir": self.cache_dir,
            "providers": {d: p.to_dict() for d, p in sorted(self.providers.items())},
            "llm": self.llm.to_dict(),
        }


def _require(raw: Mapping[str, Any], key: str) -> Any:
    if key not in raw:
        raise ValidationError(key, "missing required field")
    return raw[key]


def _int_field(raw: Mapping[str, Any], key: str, default: int | None = None, minimum: int = 1) -> int:
    value = raw.get(key, default)
    if value is None:
        raise ValidationError(key, "missing required field")
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(key, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(key, f"must be >= {minimum}")
    return value


def _provider_settings(domain: str, raw: Any) -> ProviderSettings:
    if not isinstance(raw, Mapping):
        raise ValidationError(f"providers.{domain}", "expected a table")
    name = raw.get("name", "")
    if not name:
        raise ValidationError(f"providers.{domain}.name", "missing provider name")
    return ProviderSettings(
        name=name,
        base_url=raw.get("base_url", ""),
        api_key_env=raw.get("api_key_env", ""),
        fixture_dir=raw.get("fixture_dir", ""),
        page_size=int(raw.get("page_size", 20)),
        min_interval_s=float(raw.get("min_interval_s", 0.0)),
        max_retries=int(raw.get("max_retries", 3)),
    )


def _llm_settings(raw: Any) -> LlmSettings:
    if raw is None:
        return LlmSettings()
    if not isinstance(raw, Mapping):
        raise ValidationError("llm", "expected a table")
    backend = raw.get("backend", "mock")
    if backend not in ("mock", "http"):
        raise ValidationError("llm.backend", f"unknown backend {backend!r}")
    return LlmSettings(
        backend=backend,
        base_url=raw.get("base_url", ""),
        api_key_env=raw.get("api_key_env", ""),
        model=raw.get("model", "gpt-4o-mini"),
        judge_model=raw.get("judge_model", ""),
        temperature_generate=float(raw.get("temperature_generate", 0.7)),
        temperature_judge=float(raw.get("temperature_judge", 0.0)),
        temperature_translate=float(raw.get("temperature_translate", 0.0)),
        max_attempts=int(raw.get("max_attempts", 4)),
        backoff_base_s=float(raw.get("backoff_base_s", 0.5)),
        max_tokens=int(raw.get("max_tokens", 2048)),
        mock_known_entities=tuple(raw.get("mock_known_entities", ())),
    )


def validate_config(raw: Mapping[str, Any]) -> PipelineConfig:
    """Check every invariant and fill defaults; raise on the first violation."""
    target_model_id = str(_require(raw, "target_model_id"))

    cutoff = parse_date(_require(raw, "knowledge_cutoff"), "knowledge_cutoff")
    window_months = _int_field(raw, "window_months", DEFAULT_WINDOW_MONTHS, minimum=1)

    range_raw = _require(raw, "time_range")
    if not isinstance(range_raw, (list, tuple)) or len(range_raw) != 2:
        raise ValidationError("time_range", "expected [start, end]")
    start = parse_date(range_raw[0], "time_range.start")
    end = parse_date(range_raw[1], "time_range.end")
    if start > end:
        raise ValidationError("time_range", f"start {start} is after end {end}")
    earliest = window_start(cutoff, window_months)
    if start < earliest:
        raise TemporalConflictError(
            f"time_range.start {start} precedes cutoff {cutoff} + {window_months} months ({earliest})"
        )

    languages_raw = _require(raw, "languages")
    if not isinstance(languages_raw, (list, tuple)):
        raise ValidationError("languages", "expected a list of ISO-639-1 codes")
    languages = tuple(str(code) for code in languages_raw)
    for code in languages:
        if not _LANG_CODE.match(code):
            raise ValidationError("languages", f"{code!r} is not an ISO-639-1 code")
    if len(set(languages)) != len(languages):
        raise ValidationError("languages", "duplicate language codes")
    if len(languages) < 2:
        raise ValidationError("languages", "need at least 2 languages (a pivot and one target)")

    domains_raw = raw.get("domains", list(DOMAINS))
    if not isinstance(domains_raw, (list, tuple)) or not domains_raw:
        raise ValidationError("domains", "expected a non-empty list")
    domains = tuple(str(d) for d in domains_raw)
    for domain in domains:
        if domain not in DOMAINS:
            raise ValidationError("domains", f"unknown domain {domain!r}")
    if len(set(domains)) != len(domains):
        raise ValidationError("domains", "duplicate domains")

    entities_per_domain = _int_field(raw, "entities_per_domain")
    questions_per_entity = _int_field(raw, "questions_per_entity", DEFAULT_QUESTIONS_PER_ENTITY)

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ValidationError("seed", "must be an unsigned 64-bit integer")

    providers_raw = raw.get("providers", {})
    if not isinstance(providers_raw, Mapping):
        raise ValidationError("providers", "expected a table keyed by domain")
    providers = {}
    for domain in domains:
        if domain in providers_raw:
            providers[domain] = _provider_settings(domain, providers_raw[domain])

    return PipelineConfig(
        target_model_id=target_model_id,
        knowledge_cutoff=cutoff,
        time_range=(start, end),
        languages=languages,
        domains=domains,
        entities_per_domain=entities_per_domain,
        questions_per_entity=questions_per_entity,
        window_months=window_months,
        seed=seed,
        cache_dir=str(raw.get("cache_dir", "cache")),
        providers=providers,
        llm=_llm_settings(raw.get("llm")),
    )


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if path.suffix == ".toml":
        with open(path, "rb") as handle:
            raw = tomli.load(handle)
    elif path.suffix == ".json":
        raw = json.loads(path.read_text(encoding="utf-8"))
    else:
        raise ValidationError("config", f"unsupported config format {path.suffix!r}")
    return validate_config(raw)
