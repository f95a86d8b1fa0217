"""Entity-provider interface and the selection/filter helpers.

Providers yield :class:`KnowledgeEntity` records from a catalog API and know
how to turn a raw payload into document-template fields and a list of proper
names that later integrity checks must preserve.
"""

from __future__ import annotations

import datetime as dt
from typing import Iterable, Iterator, Protocol

from ..dates import window_start
from ..domains import TEMPLATES
from ..records import KnowledgeEntity, SourceDocument
from .transport import CachedClient


class EntityProvider(Protocol):
    name: str
    domain: str

    def iter_entities(self, client: CachedClient) -> Iterator[KnowledgeEntity]: ...

    def document_fields(self, payload: dict) -> tuple[str, dict[str, str]]: ...

    def proper_names(self, payload: dict) -> tuple[str, ...]: ...


def fetch_entities(
    provider: EntityProvider,
    client: CachedClient,
    time_range: tuple[dt.date, dt.date],
    limit: int,
) -> list[KnowledgeEntity]:
    """Entities inside [start, end], ordered by (occurrence_date, entity_id).

    Deduplicates by entity_id (first occurrence wins) before truncating to
    ``limit`` so reruns select the same set regardless of page boundaries.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    start, end = time_range
    seen: dict[str, KnowledgeEntity] = {}
    for entity in provider.iter_entities(client):
        if not (start <= entity.occurrence_date <= end):
            continue
        if entity.entity_id not in seen:
            seen[entity.entity_id] = entity
    ordered = sorted(seen.values(), key=lambda e: (e.occurrence_date, e.entity_id))
    return ordered[:limit]


def temporal_filter(
    entities: Iterable[KnowledgeEntity],
    cutoff: dt.date,
    window_months: int,
) -> tuple[list[KnowledgeEntity], list[KnowledgeEntity]]:
    """Split entities into (admissible, rejected) around cutoff + window.

    Admissible means occurrence_date >= the first day after the buffer
    window, inclusive.  Order is preserved and every entity lands in exactly
    one bucket.
    """
    earliest = window_start(cutoff, window_months)
    kept: list[KnowledgeEntity] = []
    dropped: list[KnowledgeEntity] = []
    for entity in entities:
        (kept if entity.occurrence_date >= earliest else dropped).append(entity)
    return kept, dropped


def fetch_document(
    provider: EntityProvider, entity: KnowledgeEntity, language: str
) -> SourceDocument:
    template_id, fields = provider.document_fields(entity.provider_payload)
    text = TEMPLATES[template_id].render(fields)
    return SourceDocument(
        entity_id=entity.entity_id,
        language=language,
        text=text,
        template_id=template_id,
    )
