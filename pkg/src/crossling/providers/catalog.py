"""Concrete entity providers for the three domains.

Each provider speaks a small paginated catalog API: every page responds with
``{"page": n, "total_pages": t, "results": [...]}``.  Items that do not parse
are logged and skipped; one bad record must never sink a fetch.
"""

from __future__ import annotations

import logging
from typing import Iterator

from ..dates import parse_date
from ..errors import MalformedRecord, ValidationError
from ..records import KnowledgeEntity
from .transport import CachedClient

log = logging.getLogger("crossling.providers")


def _pages(client: CachedClient, path: str) -> Iterator[list]:
    page = 1
    while True:
        data = client.get(f"{path}?page={page}")
        if not isinstance(data, dict):
            raise MalformedRecord(f"{path}: page payload is not an object")
        yield list(data.get("results", ()))
        if page >= int(data.get("total_pages", page)):
            return
        page += 1


class MovieProvider:
    name = "tmdb"
    domain = "movie"

    def iter_entities(self, client: CachedClient) -> Iterator[KnowledgeEntity]:
        for results in _pages(client, "discover/movie"):
            for item in results:
                try:
                    yield KnowledgeEntity(
                        entity_id=f"movie:{self.name}:{item['id']}",
                        domain=self.domain,
                        display_name=str(item["title"]),
                        occurrence_date=parse_date(item["release_date"], "release_date"),
                        provider_payload=dict(item),
                    )
                except (KeyError, TypeError, ValidationError) as exc:
                    log.warning("skipping malformed movie record: %s", exc)

    def document_fields(self, payload: dict) -> tuple[str, dict[str, str]]:
        return "movie.v1", {
            "title": str(payload["title"]),
            "casts": ", ".join(str(c) for c in payload.get("cast", ())),
            "summary": str(payload.get("summary", "")),
            "synopsis": str(payload.get("synopsis", "")),
        }

    def proper_names(self, payload: dict) -> tuple[str, ...]:
        return (str(payload["title"]), *(str(c) for c in payload.get("cast", ())))


class MusicProvider:
    name = "ytmusic"
    domain = "music"

    def iter_entities(self, client: CachedClient) -> Iterator[KnowledgeEntity]:
        for results in _pages(client, "videos"):
            for item in results:
                try:
                    yield KnowledgeEntity(
                        entity_id=f"music:{self.name}:{item['video_id']}",
                        domain=self.domain,
                        display_name=str(item["title"]),
                        occurrence_date=parse_date(item["release_date"], "release_date"),
                        provider_payload=dict(item),
                    )
                except (KeyError, TypeError, ValidationError) as exc:
                    log.warning("skipping malformed music record: %s", exc)

    def document_fields(self, payload: dict) -> tuple[str, dict[str, str]]:
        return "music.v1", {
            "title": str(payload["title"]),
            "date": str(payload["release_date"]),
            "description": str(payload.get("description", "")),
        }

    def proper_names(self, payload: dict) -> tuple[str, ...]:
        return (str(payload["title"]), *(str(a) for a in payload.get("artists", ())))


class SportsProvider:
    name = "sportsdb"
    domain = "sports"

    def iter_entities(self, client: CachedClient) -> Iterator[KnowledgeEntity]:
        for results in _pages(client, "events"):
            for item in results:
                try:
                    date = parse_date(item["date"], "date")
                    title = f"{item['home_team']} vs {item['away_team']} {date.isoformat()}"
                    yield KnowledgeEntity(
                        entity_id=f"sports:{self.name}:{item['event_id']}",
                        domain=self.domain,
                        display_name=title,
                        occurrence_date=date,
                        provider_payload=dict(item),
                    )
                except (KeyError, TypeError, ValidationError) as exc:
                    log.warning("skipping malformed sports record: %s", exc)

    def document_fields(self, payload: dict) -> tuple[str, dict[str, str]]:
        sport = str(payload["sport"])
        fields = {
            "sports": sport,
            "league": str(payload["league"]),
            "home_team": str(payload["home_team"]),
            "away_team": str(payload["away_team"]),
            "date": str(payload["date"]),
            "home_score": str(payload["home_score"]),
            "away_score": str(payload["away_score"]),
        }
        if sport.lower() == "baseball":
            fields.update(
                venue=str(payload["venue"]),
                home_innings=" ".join(str(i) for i in payload["home_innings"]),
                away_innings=" ".join(str(i) for i in payload["away_innings"]),
                home_hits=str(payload["home_hits"]),
                home_errors=str(payload["home_errors"]),
                away_hits=str(payload["away_hits"]),
                away_errors=str(payload["away_errors"]),
            )
            return "sports.baseball.v1", fields
        stats = payload.get("stats", {})
        # sorted: upstream key order is not stable across payload round trips
        fields["stats_block"] = "\n".join(f"{k}: {v}" for k, v in sorted(stats.items()))
        return "sports.soccer.v1", fields

    def proper_names(self, payload: dict) -> tuple[str, ...]:
        names = [str(payload["home_team"]), str(payload["away_team"]), str(payload["league"])]
        if "venue" in payload:
            names.append(str(payload["venue"]))
        return tuple(names)


PROVIDERS = {
    "movie": MovieProvider,
    "music": MusicProvider,
    "sports": SportsProvider,
}


def provider_for(domain: str):
    try:
        return PROVIDERS[domain]()
    except KeyError:
        raise ValueError(f"no provider registered for domain {domain!r}") from None
