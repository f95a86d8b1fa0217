"""Translation of QAs and documents with mechanical integrity checks.

Model translations are never trusted blind: every output is re-checked for
structural drift (keys, labels, option letters) and for dropped proper
names, and a failed check is retried once before the item is discarded.
"""

from __future__ import annotations

import json
import logging
import re
from typing import Iterable

from .config import LlmSettings
from .domains import PROFILES, TEMPLATES
from .errors import CrosslingError, IntegrityViolation
from .llm.gateway import LlmGateway, LlmRequest
from .llm.jsonx import extract_json
from .llm.prompts import doc_translate_bindings, qa_translate_bindings
from .providers.base import EntityProvider
from .records import OPTION_KEYS, FactQA, KnowledgeEntity, SourceDocument, qa_id_for

log = logging.getLogger("crossling.translate")

KEY_SET_CHANGED = "KEY_SET_CHANGED"
OPTION_COUNT = "OPTION_COUNT"
CORRECT_OPTION_CHANGED = "CORRECT_OPTION_CHANGED"
EMPTY_VALUE = "EMPTY_VALUE"
LABEL_CHANGED = "LABEL_CHANGED"
LINE_STRUCTURE = "LINE_STRUCTURE"
NAME_DROPPED = "NAME_DROPPED"

_LABEL = re.compile(r"^(?:-\s*)?([^:]+):")


def _dict_text(payload: dict) -> str:
    parts = [str(payload.get("question", ""))]
    options = payload.get("options")
    if isinstance(options, dict):
        parts.extend(str(v) for v in options.values())
    return "\n".join(parts)


def _check_qa(original: dict, translated: object, codes: list[str]) -> None:
    if not isinstance(translated, dict):
        codes.append(KEY_SET_CHANGED)
        return
    if set(translated) != set(original):
        codes.append(KEY_SET_CHANGED)
    o_opts = original.get("options", {})
    t_opts = translated.get("options")
    if isinstance(t_opts, dict):
        if len(t_opts) != len(o_opts):
            codes.append(OPTION_COUNT)
        if set(t_opts) != set(o_opts) and KEY_SET_CHANGED not in codes:
            codes.append(KEY_SET_CHANGED)
    if translated.get("correct_option") != original.get("correct_option"):
        codes.append(CORRECT_OPTION_CHANGED)
    if not str(translated.get("question", "")).strip():
        codes.append(EMPTY_VALUE)
    elif isinstance(t_opts, dict) and any(not str(v).strip() for v in t_opts.values()):
        codes.append(EMPTY_VALUE)


def _check_document(original: str, translated: str, codes: list[str]) -> None:
    o_lines = original.splitlines()
    t_lines = translated.splitlines()
    if len(o_lines) != len(t_lines):
        codes.append(LINE_STRUCTURE)
        return
    for o_line, t_line in zip(o_lines, t_lines):
        o_label = _LABEL.match(o_line)
        if o_label is None:
            continue
        t_label = _LABEL.match(t_line)
        if t_label is None or t_label.group(1) != o_label.group(1):
            if LABEL_CHANGED not in codes:
                codes.append(LABEL_CHANGED)
            continue
        o_value = o_line.split(":", 1)[1].strip()
        t_value = t_line.split(":", 1)[1].strip()
        if o_value and not t_value and EMPTY_VALUE not in codes:
            codes.append(EMPTY_VALUE)


def check_integrity(
    original: dict | str, translated: object, proper_names: Iterable[str] = ()
) -> list[str]:
    """Distinct violation codes for a translation, empty when it is sound."""
    codes: list[str] = []
    if isinstance(original, dict):
        _check_qa(original, translated, codes)
        o_text = _dict_text(original)
        t_text = _dict_text(translated) if isinstance(translated, dict) else ""
    else:
        t_text = translated if isinstance(translated, str) else ""
        if not isinstance(translated, str):
            codes.append(LINE_STRUCTURE)
        else:
            _check_document(original, translated, codes)
        o_text = original
    for name in proper_names:
        if name and name in o_text and name not in t_text:
            codes.append(NAME_DROPPED)
            break
    return codes


def _request_qa_translation(
    gateway: LlmGateway, settings: LlmSettings, lang: str, qa_payload: dict
) -> object:
    request = LlmRequest(
        template_id="qa_translate",
        bindings=qa_translate_bindings(
            lang, json.dumps(qa_payload, ensure_ascii=False, sort_keys=True)
        ),
        temperature=settings.temperature_translate,
        max_tokens=settings.max_tokens,
        model=settings.model,
    )
    return extract_json(gateway.send(request).text)


def translate_qa(
    gateway: LlmGateway,
    settings: LlmSettings,
    qa: FactQA,
    lang: str,
    proper_names: Iterable[str] = (),
) -> FactQA:
    """QA translated into ``lang`` under the pivot's base id.

    One retry on an integrity failure, then IntegrityViolation; the caller
    is responsible for dropping the base item everywhere.
    """
    payload = {"question": qa.question, "options": qa.options, "correct_option": qa.correct_option}
    names = tuple(proper_names)
    last_codes: list[str] = []
    for _attempt in range(2):
        translated = _request_qa_translation(gateway, settings, lang, payload)
        last_codes = check_integrity(payload, translated, names)
        if not last_codes:
            return FactQA(
                qa_id=qa_id_for(qa.base_id, lang),
                entity_id=qa.entity_id,
                language=lang,
                question=str(translated["question"]),
                options={k: str(translated["options"][k]) for k in OPTION_KEYS},
                correct_option=str(translated["correct_option"]),
                status=qa.status,
                source_sentence=qa.source_sentence,
            )
        log.warning("retrying %s -> %s after integrity codes %s", qa.qa_id, lang, last_codes)
    raise IntegrityViolation(last_codes)


def translate_document(
    gateway: LlmGateway,
    settings: LlmSettings,
    provider: EntityProvider,
    entity: KnowledgeEntity,
    document: SourceDocument,
    lang: str,
) -> SourceDocument:
    """Document translated into ``lang`` by re-rendering translated fields.

    Field labels are never produced by the model; only the translatable
    values pass through it, and the template re-render keeps structure.
    """
    template_id, fields = provider.document_fields(entity.provider_payload)
    profile = PROFILES[entity.domain]
    names = provider.proper_names(entity.provider_payload)
    bindings = doc_translate_bindings(entity.domain, lang, fields)
    request = LlmRequest(
        template_id="doc_translate",
        bindings=bindings,
        temperature=settings.temperature_translate,
        max_tokens=settings.max_tokens,
        model=settings.model,
    )
    last_codes: list[str] = []
    for _attempt in range(2):
        payload = extract_json(gateway.send(request).text)
        translation = payload.get("translation")
        if not isinstance(translation, dict):
            last_codes = [KEY_SET_CHANGED]
            log.warning("document translation for %s lacks a translation object", entity.entity_id)
            continue
        merged = dict(fields)
        try:
            for field_key, _label, out_key in profile.translated_fields:
                merged[field_key] = str(translation[out_key])
        except KeyError:
            last_codes = [KEY_SET_CHANGED]
            log.warning("document translation for %s dropped an output key", entity.entity_id)
            continue
        text = TEMPLATES[template_id].render(merged)
        last_codes = check_integrity(document.text, text, names)
        if not last_codes:
            return SourceDocument(
                entity_id=entity.entity_id,
                language=lang,
                text=text,
                template_id=template_id,
            )
        log.warning(
            "retrying document %s -> %s after integrity codes %s",
            entity.entity_id,
            lang,
            last_codes,
        )
    raise IntegrityViolation(last_codes)


def qa_proper_names(entity: KnowledgeEntity, provider: EntityProvider) -> tuple[str, ...]:
    try:
        return provider.proper_names(entity.provider_payload)
    except CrosslingError:
        return ()
