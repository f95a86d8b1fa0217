"""Benchmark assembly: consistency filtering, on-disk layout, manifest.

The assembly step is where per-stage outputs become one coherent dataset:
an entity survives only with documents in every language and at least one
verified QA, and a question survives only with a translation in every
target language.  Serialization is canonical and fully hashed so reruns are
byte-identical and drift is detectable.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import PipelineConfig, validate_config
from .errors import IncompleteCoverage, ManifestMismatch
from .records import (
    STATUS_VERIFIED,
    FactQA,
    KnowledgeEntity,
    SourceDocument,
    canonical_json,
    read_jsonl,
    write_jsonl,
)

MANIFEST_SCHEMA = "benchmark/1"


@dataclass(frozen=True)
class BenchmarkDataset:
    config: PipelineConfig
    entities: list[KnowledgeEntity]
    documents: list[SourceDocument]
    validation: list[FactQA]
    test: list[FactQA]
    generated_counts: dict[str, int] = field(default_factory=dict)
    exclusions: dict[str, int] = field(default_factory=dict)

    def documents_for(self, language: str) -> list[SourceDocument]:
        return [d for d in self.documents if d.language == language]

    def test_for(self, language: str) -> list[FactQA]:
        return [q for q in self.test if q.language == language]


def assemble(
    config: PipelineConfig,
    entities: list[KnowledgeEntity],
    documents: list[SourceDocument],
    validation: list[FactQA],
    test: list[FactQA],
    generated_counts: dict[str, int] | None = None,
) -> BenchmarkDataset:
    """Filter stage outputs down to a consistent dataset.

    Raises IncompleteCoverage when nothing survives, which almost always
    means an upstream stage produced nothing rather than a filtering bug.
    """
    langs = set(config.languages)
    targets = set(config.target_languages)

    doc_langs: dict[str, set[str]] = {}
    for doc in documents:
        doc_langs.setdefault(doc.entity_id, set()).add(doc.language)
    covered = {eid for eid, have in doc_langs.items() if langs <= have}
    no_coverage = sum(1 for e in entities if e.entity_id not in covered)

    validation = [q for q in validation if q.status == STATUS_VERIFIED]
    test_langs: dict[str, set[str]] = {}
    for qa in test:
        test_langs.setdefault(qa.base_id, set()).add(qa.language)
    complete_bases = {
        qa.base_id
        for qa in validation
        if targets <= test_langs.get(qa.base_id, set()) and qa.entity_id in covered
    }
    incomplete = len({q.base_id for q in validation}) - len(complete_bases)

    kept_validation = sorted(
        (q for q in validation if q.base_id in complete_bases), key=lambda q: q.qa_id
    )
    kept_entity_ids = {q.entity_id for q in kept_validation}
    no_verified = sum(
        1 for e in entities if e.entity_id in covered and e.entity_id not in kept_entity_ids
    )

    kept_entities = sorted(
        (e for e in entities if e.entity_id in kept_entity_ids),
        key=lambda e: (e.domain, e.entity_id),
    )
    kept_documents = sorted(
        (d for d in documents if d.entity_id in kept_entity_ids),
        key=lambda d: (d.language, d.entity_id),
    )
    kept_test = sorted(
        (q for q in test if q.base_id in complete_bases and q.language in targets),
        key=lambda q: q.qa_id,
    )

    if not kept_entities:
        raise IncompleteCoverage("no entity survived assembly filtering")

    return BenchmarkDataset(
        config=config,
        entities=kept_entities,
        documents=kept_documents,
        validation=kept_validation,
        test=kept_test,
        generated_counts=dict(generated_counts or {}),
        exclusions={
            "no_doc_coverage": no_coverage,
            "incomplete_translation": incomplete,
            "no_verified_qa": no_verified,
        },
    )


def _created_at() -> str:
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", str(int(time.time()))))
    return dt.datetime.fromtimestamp(epoch, tz=dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _file_sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def domain_counts(dataset: BenchmarkDataset) -> dict[str, dict[str, int]]:
    counts: dict[str, dict[str, int]] = {}
    for domain in dataset.config.domains:
        counts[domain] = {
            "entities": sum(1 for e in dataset.entities if e.domain == domain),
            "generated": int(dataset.generated_counts.get(domain, 0)),
            "validation": sum(1 for q in dataset.validation if _dom(q) == domain),
            "test": sum(1 for q in dataset.test if _dom(q) == domain),
        }
    return counts


def _dom(qa: FactQA) -> str:
    return qa.entity_id.split(":", 1)[0]


def serialize(dataset: BenchmarkDataset, out_dir: Path) -> dict:
    """Write the dataset layout and return the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, Path] = {"entities.jsonl": out / "entities.jsonl"}
    write_jsonl(files["entities.jsonl"], (e.to_dict() for e in dataset.entities))

    for lang in dataset.config.languages:
        rel = f"train/{lang}/docs.jsonl"
        files[rel] = out / rel
        write_jsonl(files[rel], (d.to_dict() for d in dataset.documents_for(lang)))

    files["validation/qas.jsonl"] = out / "validation/qas.jsonl"
    write_jsonl(files["validation/qas.jsonl"], (q.to_dict() for q in dataset.validation))

    for lang in dataset.config.target_languages:
        rel = f"test/{lang}/qas.jsonl"
        files[rel] = out / rel
        write_jsonl(files[rel], (q.to_dict() for q in dataset.test_for(lang)))

    hashes = {rel: _file_sha(path) for rel, path in sorted(files.items())}
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "pipeline_version": _pipeline_version(),
        "created_at": _created_at(),
        "config": dataset.config.to_dict(),
        "counts": domain_counts(dataset),
        "exclusions": dict(dataset.exclusions),
        "files": hashes,
        "dataset_hash": hashlib.sha256(canonical_json(hashes).encode("utf-8")).hexdigest(),
    }
    (out / "manifest.json").write_text(
        canonical_json(manifest) + "\n", encoding="utf-8", newline="\n"
    )
    return manifest


def _pipeline_version() -> str:
    from . import __version__

    return __version__


def read_manifest(out_dir: Path) -> dict:
    return json.loads((Path(out_dir) / "manifest.json").read_text(encoding="utf-8"))


def verify_manifest(out_dir: Path) -> dict:
    """Recompute file hashes and compare with the manifest; return it."""
    out = Path(out_dir)
    manifest = read_manifest(out)
    bad: list[str] = []
    for rel, expected in sorted(manifest.get("files", {}).items()):
        path = out / rel
        if not path.is_file():
            bad.append(f"{rel}: missing")
        elif _file_sha(path) != expected:
            bad.append(f"{rel}: hash mismatch")
    if bad:
        raise ManifestMismatch("; ".join(bad))
    return manifest


def load_dataset(out_dir: Path, verify: bool = True) -> BenchmarkDataset:
    out = Path(out_dir)
    manifest = verify_manifest(out) if verify else read_manifest(out)
    config = validate_config(manifest["config"])
    entities = [KnowledgeEntity.from_dict(r) for r in read_jsonl(out / "entities.jsonl")]
    documents: list[SourceDocument] = []
    for lang in config.languages:
        documents.extend(
            SourceDocument.from_dict(r) for r in read_jsonl(out / f"train/{lang}/docs.jsonl")
        )
    validation = [FactQA.from_dict(r) for r in read_jsonl(out / "validation/qas.jsonl")]
    test: list[FactQA] = []
    for lang in config.target_languages:
        test.extend(FactQA.from_dict(r) for r in read_jsonl(out / f"test/{lang}/qas.jsonl"))
    generated = {d: c.get("generated", 0) for d, c in manifest.get("counts", {}).items()}
    return BenchmarkDataset(
        config=config,
        entities=entities,
        documents=documents,
        validation=validation,
        test=test,
        generated_counts=generated,
        exclusions=dict(manifest.get("exclusions", {})),
    )


def stats_rows(counts: dict[str, dict[str, int]]) -> list[dict]:
    """Per-domain dataset statistics plus a totals row."""
    rows = []
    total = {"entities": 0, "generated": 0, "validation": 0, "test": 0}
    for domain in sorted(counts):
        row = counts[domain]
        rows.append({"domain": domain, **{k: int(row.get(k, 0)) for k in total}})
        for key in total:
            total[key] += int(row.get(key, 0))
    rows.append({"domain": "total", **total})
    return rows


def stats(dataset: BenchmarkDataset) -> list[dict]:
    return stats_rows(domain_counts(dataset))
