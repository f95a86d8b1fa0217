"""Domain value types and line-delimited JSON persistence.

Everything written to disk is UTF-8, NFC-normalized, with sorted keys, so
identical inputs always serialize to identical bytes.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator

DOMAINS = ("movie", "music", "sports")
OPTION_KEYS = ("A", "B", "C", "D")

QA_SCHEMA = "factqa/1"
DOC_SCHEMA = "sourcedoc/1"
ENTITY_SCHEMA = "entity/1"


def nfc(value: Any) -> Any:
    """Recursively NFC-normalize every string in a JSON-like value."""
    if isinstance(value, str):
        return unicodedata.normalize("NFC", value)
    if isinstance(value, dict):
        return {nfc(k): nfc(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [nfc(v) for v in value]
    return value


def canonical_json(value: Any) -> str:
    """Compact, key-sorted, NFC-normalized JSON used for hashing and storage."""
    return json.dumps(nfc(value), ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def content_hash(value: Any) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class KnowledgeEntity:
    """A self-contained, time-stamped real-world item."""

    entity_id: str
    domain: str
    display_name: str
    occurrence_date: dt.date
    provider_payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": ENTITY_SCHEMA,
            "entity_id": self.entity_id,
            "domain": self.domain,
            "display_name": self.display_name,
            "occurrence_date": self.occurrence_date.isoformat(),
            "provider_payload": self.provider_payload,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "KnowledgeEntity":
        return cls(
            entity_id=raw["entity_id"],
            domain=raw["domain"],
            display_name=raw["display_name"],
            occurrence_date=dt.date.fromisoformat(raw["occurrence_date"]),
            provider_payload=raw.get("provider_payload", {}),
        )


@dataclass(frozen=True)
class SourceDocument:
    """Canonical factual text for one entity in one language."""

    entity_id: str
    language: str
    text: str
    template_id: str

    def to_dict(self) -> dict:
        return {
            "schema": DOC_SCHEMA,
            "entity_id": self.entity_id,
            "language": self.language,
            "text": self.text,
            "template_id": self.template_id,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "SourceDocument":
        return cls(
            entity_id=raw["entity_id"],
            language=raw["language"],
            text=raw["text"],
            template_id=raw["template_id"],
        )


STATUS_GENERATED = "generated"
STATUS_VERIFIED = "verified"
STATUS_REJECTED = "rejected"


def make_base_qa_id(entity_id: str, question: str, option_texts: Iterable[str]) -> str:
    """Stable id shared by all translations of one QA.

    Option texts are hashed in sorted order so re-randomizing answer
    positions never changes the id.
    """
    parts = [entity_id, question, *sorted(option_texts)]
    joined = "\x1f".join(unicodedata.normalize("NFC", p) for p in parts)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]


def qa_id_for(base_id: str, language: str) -> str:
    return f"{base_id}.{language}"


@dataclass(frozen=True)
class FactQA:
    """A four-option multiple-choice question tied to one entity."""

    qa_id: str
    entity_id: str
    language: str
    question: str
    options: dict[str, str]
    correct_option: str
    status: str = STATUS_GENERATED
    source_sentence: str | None = None

    @property
    def base_id(self) -> str:
        return self.qa_id.rsplit(".", 1)[0]

    @property
    def correct_text(self) -> str:
        return self.options[self.correct_option]

    def validate(self) -> list[str]:
        """Return structural violations; empty means the QA is well-formed."""
        problems = []
        if not self.question.strip():
            problems.append("empty question")
        if sorted(self.options) != sorted(OPTION_KEYS):
            problems.append("options must be keyed exactly A-D")
        else:
            texts = [self.options[k] for k in OPTION_KEYS]
            if any(not t.strip() for t in texts):
                problems.append("empty option text")
            if len(set(texts)) != len(texts):
                problems.append("duplicate option texts")
        if self.correct_option not in self.options:
            problems.append(f"correct_option {self.correct_option!r} not among options")
        return problems

    def to_dict(self) -> dict:
        out = {
            "schema": QA_SCHEMA,
            "qa_id": self.qa_id,
            "entity_id": self.entity_id,
            "language": self.language,
            "question": self.question,
            "options": dict(self.options),
            "correct_option": self.correct_option,
            "status": self.status,
        }
        if self.source_sentence is not None:
            out["source_sentence"] = self.source_sentence
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "FactQA":
        return cls(
            qa_id=raw["qa_id"],
            entity_id=raw["entity_id"],
            language=raw["language"],
            question=raw["question"],
            options=dict(raw["options"]),
            correct_option=raw["correct_option"],
            status=raw.get("status", STATUS_GENERATED),
            source_sentence=raw.get("source_sentence"),
        )

    def with_status(self, status: str, source_sentence: str | None = None) -> "FactQA":
        return replace(self, status=status, source_sentence=source_sentence)


def entity_domain(entity_id: str) -> str:
    """Entity ids are '<domain>:<provider>:<native id>'."""
    return entity_id.split(":", 1)[0]


def write_jsonl(path: Path, rows: Iterable[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for row in rows:
            handle.write(canonical_json(row))
            handle.write("\n")


def read_jsonl(path: Path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield json.loads(line)
