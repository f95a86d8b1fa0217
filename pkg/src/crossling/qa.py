"""QA generation, option shuffling, and grounding verification.

Questions are generated in the pivot language from the entity's source
document, options are re-shuffled locally so correct answers are uniform
over A-D regardless of model habits, and every pair is verified against the
document before it can enter the benchmark.
"""

from __future__ import annotations

import json
import logging
import random

from .config import LlmSettings
from .errors import CrosslingError, GenerationFailed
from .llm.gateway import LlmGateway, LlmRequest
from .llm.jsonx import extract_json
from .llm.prompts import qa_generate_bindings, qa_verify_bindings
from .records import (
    OPTION_KEYS,
    STATUS_REJECTED,
    STATUS_VERIFIED,
    FactQA,
    KnowledgeEntity,
    SourceDocument,
    make_base_qa_id,
    qa_id_for,
)

log = logging.getLogger("crossling.qa")

DECISION_SUPPORTED = "SUPPORTED"
DECISION_UNSUPPORTED = "UNSUPPORTED"


def shuffle_options(
    options: dict[str, str], correct: str, rng: random.Random
) -> tuple[dict[str, str], str]:
    """Uniformly permute option texts over A-D, tracking the correct letter."""
    texts = [options[k] for k in OPTION_KEYS]
    correct_index = OPTION_KEYS.index(correct)
    order = rng.sample(range(len(OPTION_KEYS)), len(OPTION_KEYS))
    shuffled = {key: texts[order[i]] for i, key in enumerate(OPTION_KEYS)}
    new_correct = OPTION_KEYS[order.index(correct_index)]
    return shuffled, new_correct


def _qa_from_item(
    entity: KnowledgeEntity, lang: str, item: dict, rng: random.Random
) -> FactQA | None:
    if not isinstance(item, dict) or not isinstance(item.get("options"), dict):
        return None
    question = str(item.get("question", "")).strip()
    options = {str(k): str(v) for k, v in item["options"].items()}
    correct = str(item.get("correct_option", "")).strip()
    if set(options) != set(OPTION_KEYS) or correct not in options:
        return None
    options, correct = shuffle_options(options, correct, rng)
    base = make_base_qa_id(entity.entity_id, question, options.values())
    qa = FactQA(
        qa_id=qa_id_for(base, lang),
        entity_id=entity.entity_id,
        language=lang,
        question=question,
        options=options,
        correct_option=correct,
    )
    if qa.validate():
        return None
    return qa


def generate_qas(
    gateway: LlmGateway,
    settings: LlmSettings,
    entity: KnowledgeEntity,
    document: SourceDocument,
    lang: str,
    count: int,
    rng: random.Random,
) -> list[FactQA]:
    """Up to ``count`` schema-valid generated QAs for one entity."""
    request = LlmRequest(
        template_id="qa_generate",
        bindings=qa_generate_bindings(entity.domain, lang, document.text),
        temperature=settings.temperature_generate,
        max_tokens=settings.max_tokens,
        model=settings.model,
    )
    text = gateway.send(request).text
    payload = extract_json(text)
    items = payload.get("QA")
    if not isinstance(items, list):
        raise GenerationFailed(f"qa_generate returned no QA list for {entity.entity_id}")
    qas: list[FactQA] = []
    seen_bases: set[str] = set()
    for item in items:
        qa = _qa_from_item(entity, lang, item, rng)
        if qa is None:
            log.warning("dropping malformed generated QA for %s", entity.entity_id)
            continue
        if qa.base_id in seen_bases:
            continue
        seen_bases.add(qa.base_id)
        qas.append(qa)
        if len(qas) == count:
            break
    return qas


def verify_qa(
    gateway: LlmGateway, settings: LlmSettings, document: SourceDocument, qa: FactQA
) -> FactQA:
    """Return the QA marked verified (with source sentence) or rejected.

    Unparseable verifier output rejects the pair: a fact we cannot confirm
    is treated as ungrounded.
    """
    qa_json = json.dumps(
        {"question": qa.question, "options": qa.options, "correct_option": qa.correct_option},
        ensure_ascii=False,
        sort_keys=True,
    )
    request = LlmRequest(
        template_id="qa_verify",
        bindings=qa_verify_bindings(document.text, qa_json),
        temperature=settings.temperature_judge,
        max_tokens=settings.max_tokens,
        model=settings.judge_model or settings.model,
    )
    try:
        text = gateway.send(request).text
        payload = extract_json(text)
        decision = str(payload.get("Decision", "")).strip().upper()
    except CrosslingError as exc:
        log.warning("verifier failed for %s (%s); rejecting", qa.qa_id, exc)
        return qa.with_status(STATUS_REJECTED)
    if decision != DECISION_SUPPORTED:
        return qa.with_status(STATUS_REJECTED)
    sentence = str(payload.get("SourceSentence", "")).strip() or None
    return qa.with_status(STATUS_VERIFIED, source_sentence=sentence)
