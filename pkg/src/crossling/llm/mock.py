"""Deterministic offline backend.

Synthesises plausible completions for every template as a pure function of
(template_id, bindings), so offline runs are byte-for-byte reproducible and
safe under concurrency.  Specific responses can be pinned per request via
``overrides``; see :func:`binding_key`.
"""

from __future__ import annotations

import json
import re

from ..domains import parse_labeled_lines
from ..records import canonical_json, content_hash
from .gateway import LlmRequest

_HEDGES = (
    "don't have any information",
    "do not have any information",
    "i'm not aware of",
    "i am not familiar with",
)

_TAG = re.compile(r"^⟦[a-z]{2}⟧ ")

_TITLE_LABELS = ("Movie Title", "Music Video Title", "Match")

_DISTRACTOR_SUFFIXES = (" (unconfirmed)", " (rumored)", " (alternate account)")


def binding_key(bindings: dict[str, str]) -> str:
    """Stable 16-hex key identifying a rendered request's bindings."""
    return content_hash(canonical_json({k: str(v) for k, v in bindings.items()}))[:16]


def _tag(value: str, lang: str) -> str:
    return f"⟦{lang}⟧ " + _TAG.sub("", value)


def _title_of(fields: dict[str, str]) -> str:
    for label in _TITLE_LABELS:
        if label in fields:
            return fields[label]
    return next(iter(fields.values()), "")


def _norm(text: str) -> str:
    return " ".join(text.split()).casefold()


class MockBackend:
    def __init__(
        self,
        known_entities: tuple[str, ...] = (),
        overrides: dict[tuple[str, str], str] | None = None,
    ) -> None:
        self.known_entities = tuple(known_entities)
        self.overrides = dict(overrides or {})

    def complete(self, prompt: str, request: LlmRequest) -> str:
        bindings = {k: str(v) for k, v in request.bindings.items()}
        pinned = self.overrides.get((request.template_id, binding_key(bindings)))
        if pinned is not None:
            return pinned
        handler = getattr(self, "_" + request.template_id)
        return handler(bindings)

    def _knowledge_probe(self, bindings: dict[str, str]) -> str:
        name = bindings["entity_name"]
        if name in self.known_entities:
            return (
                f"{name} is something I recognize from my training data. "
                f"Coverage of {name} describes its principal participants and outcome in detail."
            )
        return f"I don't have any information about '{name}'."

    def _recognition_judge(self, bindings: dict[str, str]) -> str:
        probe = bindings["probe_text"]
        document = bindings["document"]
        lowered = probe.casefold()
        if any(h in lowered for h in _HEDGES):
            payload = {
                "verdict": "Unknown",
                "matched_facts": [],
                "rationale": "The response declines to state any facts about the entity.",
            }
            return json.dumps(payload, ensure_ascii=False)
        matched = []
        for value in parse_labeled_lines(document).values():
            if value and value in probe and value not in matched:
                matched.append(value)
        verdict = "Known" if matched else "Unknown"
        rationale = (
            "The response repeats concrete details found in the document."
            if matched
            else "No concrete detail in the response is confirmed by the document."
        )
        return json.dumps(
            {"verdict": verdict, "matched_facts": matched, "rationale": rationale},
            ensure_ascii=False,
        )

    def _qa_generate(self, bindings: dict[str, str]) -> str:
        fields = parse_labeled_lines(bindings["meta_data"])
        title = _title_of(fields)
        noun = bindings["domain_noun"]
        items = []
        for label, value in fields.items():
            if not value or label in _TITLE_LABELS:
                continue
            correct = value
            options = [correct] + [correct + s for s in _DISTRACTOR_SUFFIXES]
            qa = {
                "question": f"In the {noun}: '{title}', what does the record state for {label.casefold()}?",
                "options": dict(zip("ABCD", options)),
                "correct_option": "A",
            }
            items.append(qa)
            if len(items) == 8:
                break
        return json.dumps({"QA": items}, ensure_ascii=False)

    def _qa_verify(self, bindings: dict[str, str]) -> str:
        qa = json.loads(bindings["qa_json"])
        correct = qa["options"][qa["correct_option"]]
        document = bindings["meta_data"]
        if _norm(correct) and _norm(correct) in _norm(document):
            source = ""
            for line in document.splitlines():
                if _norm(correct) in _norm(line):
                    source = line.strip()
                    break
            return json.dumps(
                {"Decision": "SUPPORTED", "SourceSentence": source}, ensure_ascii=False
            )
        return json.dumps({"Decision": "UNSUPPORTED", "SourceSentence": ""}, ensure_ascii=False)

    def _qa_translate(self, bindings: dict[str, str]) -> str:
        lang = bindings["lang"]
        qa = json.loads(bindings["qa_json"])
        if lang != "en":
            qa["question"] = _tag(qa["question"], lang)
            qa["options"] = {k: _tag(v, lang) for k, v in qa["options"].items()}
        return json.dumps(qa, ensure_ascii=False)

    def _doc_translate(self, bindings: dict[str, str]) -> str:
        lang = bindings["lang"]
        values = list(parse_labeled_lines(bindings["field_lines"]).values())
        keys = list(json.loads(bindings["output_format"])["translation"])
        translation = {}
        for key, value in zip(keys, values):
            translation[key] = value if lang == "en" else _tag(value, lang)
        return json.dumps({"translation": translation}, ensure_ascii=False)


class FlakyBackend:
    """Wraps a backend and fails the first ``failures`` calls; for retry tests."""

    def __init__(self, inner, failures: int, exc_factory) -> None:
        self.inner = inner
        self.remaining = failures
        self.exc_factory = exc_factory
        self.calls = 0

    def complete(self, prompt: str, request: LlmRequest) -> str:
        self.calls += 1
        if self.remaining > 0:
            self.remaining -= 1
            raise self.exc_factory()
        return self.inner.complete(prompt, request)
