"""Contamination gate: probe the model for prior knowledge of each entity.

An entity is admissible only when the probe response shows no recognition.
The gate fails closed: parse failures, refusals, and backend exhaustion all
mark the entity as recognized so nothing questionable reaches the benchmark.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from .config import LlmSettings
from .errors import CrosslingError, JudgeUnparseable
from .llm.gateway import LlmGateway, LlmRequest
from .llm.jsonx import extract_json
from .llm.prompts import knowledge_probe_bindings, recognition_judge_bindings
from .records import KnowledgeEntity, SourceDocument

VERDICT_KNOWN = "Known"
VERDICT_UNKNOWN = "Unknown"


@dataclass(frozen=True)
class GateDecision:
    entity_id: str
    verdict: str
    matched_facts: tuple[str, ...]
    rationale: str
    probe_response: str
    error: str | None = None

    def to_dict(self) -> dict:
        raw = asdict(self)
        raw["matched_facts"] = list(self.matched_facts)
        if self.error is None:
            del raw["error"]
        return raw

    @classmethod
    def from_dict(cls, raw: dict) -> "GateDecision":
        return cls(
            entity_id=raw["entity_id"],
            verdict=raw["verdict"],
            matched_facts=tuple(raw.get("matched_facts", ())),
            rationale=raw.get("rationale", ""),
            probe_response=raw.get("probe_response", ""),
            error=raw.get("error"),
        )


def probe_entity(gateway: LlmGateway, settings: LlmSettings, entity: KnowledgeEntity) -> str:
    request = LlmRequest(
        template_id="knowledge_probe",
        bindings=knowledge_probe_bindings(entity.display_name),
        temperature=settings.temperature_judge,
        max_tokens=settings.max_tokens,
        model=settings.model,
    )
    return gateway.send(request).text


def judge_recognition(
    gateway: LlmGateway,
    settings: LlmSettings,
    entity: KnowledgeEntity,
    probe_text: str,
    document: SourceDocument,
) -> GateDecision:
    request = LlmRequest(
        template_id="recognition_judge",
        bindings=recognition_judge_bindings(probe_text, document.text),
        temperature=settings.temperature_judge,
        max_tokens=settings.max_tokens,
        model=settings.judge_model or settings.model,
    )
    text = gateway.send(request).text
    payload = extract_json(text)
    verdict = str(payload.get("verdict", "")).strip().capitalize()
    if verdict not in (VERDICT_KNOWN, VERDICT_UNKNOWN):
        raise JudgeUnparseable(f"judge verdict {payload.get('verdict')!r} for {entity.entity_id}")
    facts = payload.get("matched_facts", [])
    if not isinstance(facts, list):
        raise JudgeUnparseable(f"judge matched_facts is not a list for {entity.entity_id}")
    matched = tuple(str(f) for f in facts)
    if verdict == VERDICT_KNOWN and not matched:
        raise JudgeUnparseable(f"Known verdict without matched facts for {entity.entity_id}")
    return GateDecision(
        entity_id=entity.entity_id,
        verdict=verdict,
        matched_facts=matched,
        rationale=str(payload.get("rationale", "")),
        probe_response=probe_text,
    )


def _screen_one(
    gateway: LlmGateway,
    settings: LlmSettings,
    entity: KnowledgeEntity,
    document: SourceDocument,
) -> GateDecision:
    try:
        probe_text = probe_entity(gateway, settings, entity)
        return judge_recognition(gateway, settings, entity, probe_text, document)
    except CrosslingError as exc:
        # Fail closed: an entity we could not screen counts as recognized.
        return GateDecision(
            entity_id=entity.entity_id,
            verdict=VERDICT_KNOWN,
            matched_facts=(),
            rationale="gate error; entity discarded",
            probe_response="",
            error=str(exc),
        )


def screen_entities(
    gateway: LlmGateway,
    settings: LlmSettings,
    entities: list[KnowledgeEntity],
    documents: dict[str, SourceDocument],
    jobs: int = 1,
) -> list[GateDecision]:
    """Gate decisions in input order; one per entity."""
    if jobs <= 1:
        return [_screen_one(gateway, settings, e, documents[e.entity_id]) for e in entities]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(
            pool.map(lambda e: _screen_one(gateway, settings, e, documents[e.entity_id]), entities)
        )


def admissible_entities(
    entities: list[KnowledgeEntity], decisions: list[GateDecision]
) -> list[KnowledgeEntity]:
    by_id = {d.entity_id: d for d in decisions}
    kept = []
    for entity in entities:
        decision = by_id.get(entity.entity_id)
        if decision is not None and decision.verdict == VERDICT_UNKNOWN and decision.error is None:
            kept.append(entity)
    return kept
