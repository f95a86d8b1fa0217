"""End-to-end generation pipeline with resumable stages.

Stage outputs live as JSONL under ``<out>/work/`` so any stage can be rerun
or resumed without repeating upstream model calls; the final dataset is
serialized by the assemble stage.  All randomness comes from per-entity
streams derived from the run seed, so results do not depend on worker count
or completion order.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .assemble import domain_counts, serialize, stats_rows
from .assemble import assemble as assemble_dataset
from .config import PipelineConfig, ProviderSettings, load_config
from .errors import CrosslingError, ValidationError
from .gate import GateDecision, admissible_entities, screen_entities
from .llm.gateway import HttpBackend, LlmGateway
from .llm.mock import MockBackend
from .providers.base import fetch_document, fetch_entities, temporal_filter
from .providers.catalog import provider_for
from .providers.transport import CachedClient, FixtureTransport, HttpTransport
from .qa import generate_qas, verify_qa
from .records import (
    STATUS_VERIFIED,
    FactQA,
    KnowledgeEntity,
    SourceDocument,
    read_jsonl,
    write_jsonl,
)
from .rng import new_run_rng
from .translate import translate_document, translate_qa

log = logging.getLogger("crossling.pipeline")

STAGES = ("fetch", "gate", "qa", "translate", "assemble")


def load_config_file(path: str | Path) -> PipelineConfig:
    """load_config plus resolution of fixture paths relative to the file."""
    path = Path(path)
    config = load_config(path)
    providers = {}
    for domain, settings in config.providers.items():
        fixture_dir = settings.fixture_dir
        if fixture_dir and not Path(fixture_dir).is_absolute():
            fixture_dir = str((path.parent / fixture_dir).resolve())
        providers[domain] = dataclasses.replace(settings, fixture_dir=fixture_dir)
    return dataclasses.replace(config, providers=providers)


class Pipeline:
    def __init__(
        self,
        config: PipelineConfig,
        out_dir: str | Path,
        offline: bool = False,
        jobs: int = 1,
        resume: bool = False,
    ) -> None:
        if jobs < 1:
            raise ValidationError("jobs", "must be >= 1")
        self.config = config
        self.out_dir = Path(out_dir)
        self.work_dir = self.out_dir / "work"
        self.offline = offline
        self.jobs = jobs
        self.resume = resume
        self.attrition: dict[str, dict[str, int]] = {
            d: {} for d in config.domains
        }
        self.providers = {d: provider_for(d) for d in config.domains}
        self.clients = {d: self._client(d) for d in config.domains}
        self.gateway = self._gateway()

    # -- wiring ---------------------------------------------------------

    def _provider_settings(self, domain: str) -> ProviderSettings:
        return self.config.providers.get(domain) or ProviderSettings(
            name=self.providers[domain].name
        )

    def _client(self, domain: str) -> CachedClient:
        settings = self._provider_settings(domain)
        if self.offline:
            if not settings.fixture_dir:
                raise ValidationError(
                    f"providers.{domain}.fixture_dir", "required for offline runs"
                )
            transport = FixtureTransport(Path(settings.fixture_dir))
        else:
            transport = HttpTransport(settings)
        cache_dir = Path(self.config.cache_dir) if self.config.cache_dir else None
        return CachedClient(transport, settings.name, cache_dir)

    def _gateway(self) -> LlmGateway:
        llm = self.config.llm
        if llm.backend == "mock":
            backend = MockBackend(known_entities=llm.mock_known_entities)
        elif self.offline:
            raise ValidationError("llm.backend", "offline runs require the mock backend")
        else:
            backend = HttpBackend(llm)
        return LlmGateway(backend, llm, audit_path=self.out_dir / "audit" / "llm.jsonl")

    # -- work-file helpers ----------------------------------------------

    def _work(self, name: str) -> Path:
        return self.work_dir / name

    def _have(self, name: str) -> bool:
        return self.resume and self._work(name).is_file()

    def _note(self, domain: str, key: str, value: int) -> None:
        self.attrition.setdefault(domain, {})[key] = value

    # -- stages ----------------------------------------------------------

    def fetch(self) -> tuple[list[KnowledgeEntity], list[SourceDocument]]:
        """Sample in-range entities per domain and render pivot documents."""
        if self._have("entities.jsonl") and self._have("docs_pivot.jsonl"):
            entities = self._load_entities()
            documents = self._load_documents("docs_pivot.jsonl")
            self._restore_attrition()
            return entities, documents
        pivot = self.config.pivot_language
        entities: list[KnowledgeEntity] = []
        documents: list[SourceDocument] = []
        for domain in self.config.domains:
            provider = self.providers[domain]
            sampled = fetch_entities(
                provider,
                self.clients[domain],
                self.config.time_range,
                self.config.entities_per_domain,
            )
            kept, dropped = temporal_filter(
                sampled, self.config.knowledge_cutoff, self.config.window_months
            )
            if dropped:
                log.info("%s: %d entities precede the leakage window", domain, len(dropped))
            self._note(domain, "sampled", len(sampled))
            self._note(domain, "in_window", len(kept))
            entities.extend(kept)
            documents.extend(fetch_document(provider, e, pivot) for e in kept)
        write_jsonl(self._work("entities.jsonl"), (e.to_dict() for e in entities))
        write_jsonl(self._work("docs_pivot.jsonl"), (d.to_dict() for d in documents))
        self._save_attrition()
        return entities, documents

    def gate(
        self,
        entities: list[KnowledgeEntity] | None = None,
        documents: list[SourceDocument] | None = None,
    ) -> list[KnowledgeEntity]:
        if entities is None or documents is None:
            entities = self._load_entities()
            documents = self._load_documents("docs_pivot.jsonl")
        if self._have("gate.jsonl"):
            decisions = [GateDecision.from_dict(r) for r in read_jsonl(self._work("gate.jsonl"))]
        else:
            by_id = {d.entity_id: d for d in documents}
            decisions = screen_entities(
                self.gateway, self.config.llm, entities, by_id, jobs=self.jobs
            )
            write_jsonl(self._work("gate.jsonl"), (d.to_dict() for d in decisions))
        kept = admissible_entities(entities, decisions)
        per_domain: dict[str, int] = {}
        for entity in kept:
            per_domain[entity.domain] = per_domain.get(entity.domain, 0) + 1
        for domain in self.config.domains:
            self._note(domain, "gate_valid", per_domain.get(domain, 0))
        self._save_attrition()
        return kept

    def qa(
        self,
        entities: list[KnowledgeEntity] | None = None,
        documents: list[SourceDocument] | None = None,
    ) -> tuple[list[FactQA], dict[str, int]]:
        """Generate and verify pivot-language QAs; returns all with statuses."""
        if entities is None:
            all_entities = self._load_entities()
            decisions = [GateDecision.from_dict(r) for r in read_jsonl(self._work("gate.jsonl"))]
            entities = admissible_entities(all_entities, decisions)
        if documents is None:
            documents = self._load_documents("docs_pivot.jsonl")
        if self._have("qas_pivot.jsonl") and self._have("counts.json"):
            qas = [FactQA.from_dict(r) for r in read_jsonl(self._work("qas_pivot.jsonl"))]
            generated = json.loads(self._work("counts.json").read_text(encoding="utf-8"))
            return qas, {str(k): int(v) for k, v in generated.items()}
        docs_by_id = {d.entity_id: d for d in documents}
        pivot = self.config.pivot_language

        def for_entity(entity: KnowledgeEntity) -> tuple[str, list[FactQA]]:
            document = docs_by_id[entity.entity_id]
            rng = new_run_rng(self.config.seed, f"qa:{entity.entity_id}")
            try:
                drafts = generate_qas(
                    self.gateway,
                    self.config.llm,
                    entity,
                    document,
                    pivot,
                    self.config.questions_per_entity,
                    rng,
                )
                return entity.domain, [
                    verify_qa(self.gateway, self.config.llm, document, qa) for qa in drafts
                ]
            except CrosslingError as exc:
                log.warning("qa generation failed for %s: %s", entity.entity_id, exc)
                return entity.domain, []

        results = self._map(for_entity, entities)
        qas: list[FactQA] = []
        generated: dict[str, int] = {d: 0 for d in self.config.domains}
        verified: dict[str, int] = {d: 0 for d in self.config.domains}
        for domain, entity_qas in results:
            generated[domain] += len(entity_qas)
            verified[domain] += sum(1 for q in entity_qas if q.status == STATUS_VERIFIED)
            qas.extend(entity_qas)
        write_jsonl(self._work("qas_pivot.jsonl"), (q.to_dict() for q in qas))
        self._work("counts.json").write_text(
            json.dumps(generated, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
        )
        for domain in self.config.domains:
            self._note(domain, "generated", generated[domain])
            self._note(domain, "verified", verified[domain])
        self._save_attrition()
        return qas, generated

    def translate(
        self,
        entities: list[KnowledgeEntity] | None = None,
        documents: list[SourceDocument] | None = None,
        qas: list[FactQA] | None = None,
    ) -> tuple[list[SourceDocument], list[FactQA]]:
        """Translate documents and verified QAs into every target language."""
        if entities is None:
            all_entities = self._load_entities()
            decisions = [GateDecision.from_dict(r) for r in read_jsonl(self._work("gate.jsonl"))]
            entities = admissible_entities(all_entities, decisions)
        if documents is None:
            documents = self._load_documents("docs_pivot.jsonl")
        if qas is None:
            qas = [FactQA.from_dict(r) for r in read_jsonl(self._work("qas_pivot.jsonl"))]
        if self._have("docs_all.jsonl") and self._have("qas_test.jsonl"):
            return (
                self._load_documents("docs_all.jsonl"),
                [FactQA.from_dict(r) for r in read_jsonl(self._work("qas_test.jsonl"))],
            )
        docs_by_id = {d.entity_id: d for d in documents}
        verified = [q for q in qas if q.status == STATUS_VERIFIED]
        qas_by_entity: dict[str, list[FactQA]] = {}
        for qa in verified:
            qas_by_entity.setdefault(qa.entity_id, []).append(qa)
        targets = self.config.target_languages
        dropped: list[dict] = []

        def for_entity(
            entity: KnowledgeEntity,
        ) -> tuple[list[SourceDocument], list[FactQA], list[dict]]:
            if not qas_by_entity.get(entity.entity_id):
                return [], [], []  # nothing verified: assembly would drop it anyway
            provider = self.providers[entity.domain]
            document = docs_by_id[entity.entity_id]
            names = provider.proper_names(entity.provider_payload)
            docs: list[SourceDocument] = [document]
            translated: list[FactQA] = []
            gaps: list[dict] = []
            for lang in targets:
                try:
                    docs.append(
                        translate_document(
                            self.gateway, self.config.llm, provider, entity, document, lang
                        )
                    )
                except CrosslingError as exc:
                    gaps.append(
                        {"entity_id": entity.entity_id, "language": lang, "reason": str(exc)}
                    )
                    return [], [], gaps  # no full document coverage: drop the entity
            for qa in qas_by_entity.get(entity.entity_id, ()):  # verified only
                for lang in targets:
                    try:
                        translated.append(
                            translate_qa(self.gateway, self.config.llm, qa, lang, names)
                        )
                    except CrosslingError as exc:
                        gaps.append(
                            {"base_id": qa.base_id, "language": lang, "reason": str(exc)}
                        )
                        break  # incomplete coverage removes the base item at assembly
            return docs, translated, gaps

        all_docs: list[SourceDocument] = []
        test_qas: list[FactQA] = []
        for docs, translated, gaps in self._map(for_entity, entities):
            all_docs.extend(docs)
            test_qas.extend(translated)
            dropped.extend(gaps)
        write_jsonl(self._work("docs_all.jsonl"), (d.to_dict() for d in all_docs))
        write_jsonl(self._work("qas_test.jsonl"), (q.to_dict() for q in test_qas))
        write_jsonl(self._work("dropped.jsonl"), iter(dropped))
        translated_counts: dict[str, int] = {d: 0 for d in self.config.domains}
        for qa in test_qas:
            translated_counts[qa.entity_id.split(":", 1)[0]] += 1
        for domain in self.config.domains:
            self._note(domain, "translated", translated_counts[domain])
        self._save_attrition()
        return all_docs, test_qas

    def assemble(
        self,
        entities: list[KnowledgeEntity] | None = None,
        documents: list[SourceDocument] | None = None,
        qas: list[FactQA] | None = None,
        test_qas: list[FactQA] | None = None,
        generated: dict[str, int] | None = None,
    ) -> dict:
        if entities is None:
            all_entities = self._load_entities()
            decisions = [GateDecision.from_dict(r) for r in read_jsonl(self._work("gate.jsonl"))]
            entities = admissible_entities(all_entities, decisions)
        if documents is None:
            documents = self._load_documents("docs_all.jsonl")
        if qas is None:
            qas = [FactQA.from_dict(r) for r in read_jsonl(self._work("qas_pivot.jsonl"))]
        if test_qas is None:
            test_qas = [FactQA.from_dict(r) for r in read_jsonl(self._work("qas_test.jsonl"))]
        if generated is None:
            raw = json.loads(self._work("counts.json").read_text(encoding="utf-8"))
            generated = {str(k): int(v) for k, v in raw.items()}
        dataset = assemble_dataset(
            self.config,
            entities,
            documents,
            [q for q in qas if q.status == STATUS_VERIFIED],
            test_qas,
            generated,
        )
        manifest = serialize(dataset, self.out_dir)
        self._write_run_record(manifest)
        return manifest

    def run(self, stop_after: str = "assemble") -> dict | None:
        """Run stages in order; returns the manifest if assembly ran."""
        if stop_after not in STAGES:
            raise ValidationError("stage", f"unknown stage {stop_after!r}")
        self.work_dir.mkdir(parents=True, exist_ok=True)
        entities, documents = self.fetch()
        if stop_after == "fetch":
            return None
        kept = self.gate(entities, documents)
        if stop_after == "gate":
            return None
        qas, generated = self.qa(kept, documents)
        if stop_after == "qa":
            return None
        all_docs, test_qas = self.translate(kept, documents, qas)
        if stop_after == "translate":
            return None
        return self.assemble(kept, all_docs, qas, test_qas, generated)

    # -- shared plumbing --------------------------------------------------

    def _map(self, fn, items):
        if self.jobs <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(fn, items))

    def _load_entities(self) -> list[KnowledgeEntity]:
        return [KnowledgeEntity.from_dict(r) for r in read_jsonl(self._work("entities.jsonl"))]

    def _load_documents(self, name: str) -> list[SourceDocument]:
        return [SourceDocument.from_dict(r) for r in read_jsonl(self._work(name))]

    def _save_attrition(self) -> None:
        self.work_dir.mkdir(parents=True, exist_ok=True)
        self._work("attrition.json").write_text(
            json.dumps(self.attrition, sort_keys=True) + "\n", encoding="utf-8", newline="\n"
        )

    def _restore_attrition(self) -> None:
        path = self._work("attrition.json")
        if path.is_file():
            stored = json.loads(path.read_text(encoding="utf-8"))
            for domain, counts in stored.items():
                self.attrition.setdefault(domain, {}).update(counts)

    def _write_run_record(self, manifest: dict) -> None:
        record = {
            "schema": "runrecord/1",
            "pipeline_version": manifest["pipeline_version"],
            "created_at": manifest["created_at"],
            "config": self.config.to_dict(),
            "attrition": self.attrition,
            "counts": manifest["counts"],
            "dataset_hash": manifest["dataset_hash"],
        }
        (self.out_dir / "run.json").write_text(
            json.dumps(record, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
            newline="\n",
        )


def attrition_table(attrition: dict[str, dict[str, int]]) -> str:
    """Fixed-width attrition readout for the CLI."""
    columns = ["sampled", "in_window", "gate_valid", "generated", "verified", "translated"]
    header = ["domain", *columns]
    rows = [header]
    for domain in sorted(attrition):
        counts = attrition[domain]
        rows.append([domain, *[str(counts.get(c, "-")) for c in columns]])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines)


def stats_table(counts: dict[str, dict[str, int]]) -> str:
    columns = ["entities", "generated", "validation", "test"]
    header = ["domain", *columns]
    rows = [header]
    for row in stats_rows(counts):
        rows.append([str(row["domain"]), *[str(row[c]) for c in columns]])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines)


def generate(
    config_path: str | Path,
    out_dir: str | Path,
    offline: bool = False,
    jobs: int = 1,
    resume: bool = False,
    stop_after: str = "assemble",
) -> dict | None:
    """One-call generation entry point used by the CLI."""
    config = load_config_file(config_path)
    pipeline = Pipeline(config, out_dir, offline=offline, jobs=jobs, resume=resume)
    return pipeline.run(stop_after=stop_after)


__all__ = [
    "Pipeline",
    "STAGES",
    "attrition_table",
    "domain_counts",
    "generate",
    "load_config_file",
    "stats_table",
]
