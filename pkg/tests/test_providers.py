from __future__ import annotations

import datetime as dt
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossling.errors import ProviderUnavailable
from crossling.providers.base import fetch_document, fetch_entities, temporal_filter
from crossling.providers.catalog import (
    MovieProvider,
    MusicProvider,
    SportsProvider,
    provider_for,
)
from crossling.providers.transport import CachedClient, FixtureTransport, fixture_name
from crossling.records import KnowledgeEntity

RANGE_2025 = (dt.date(2025, 1, 1), dt.date(2025, 8, 31))


def ent(entity_id: str, when: dt.date) -> KnowledgeEntity:
    return KnowledgeEntity(
        entity_id=entity_id,
        domain="movie",
        display_name=entity_id,
        occurrence_date=when,
        provider_payload={},
    )


class ListProvider:
    name = "stub"
    domain = "movie"

    def __init__(self, entities):
        self.entities = list(entities)

    def iter_entities(self, client):
        yield from self.entities


class CountingTransport:
    def __init__(self, payloads):
        self.payloads = dict(payloads)
        self.calls = 0

    def get(self, path):
        self.calls += 1
        return self.payloads[path]


def plain_client(transport) -> CachedClient:
    return CachedClient(transport, "stub", cache_dir=None)


def test_fixture_name_mapping():
    assert fixture_name("discover/movie?page=1") == "discover_movie__page-1.json"
    assert fixture_name("/videos?page=2") == "videos__page-2.json"
    assert fixture_name("events?page=1&limit=5") == "events__page-1_limit-5.json"


def test_fixture_transport_missing_path(fixtures_dir):
    transport = FixtureTransport(fixtures_dir / "providers/tmdb")
    with pytest.raises(ProviderUnavailable):
        transport.get("discover/movie?page=99")


def test_movie_provider_paginates_and_skips_malformed(fixtures_dir):
    client = plain_client(FixtureTransport(fixtures_dir / "providers/tmdb"))
    entities = list(MovieProvider().iter_entities(client))
    ids = [e.entity_id for e in entities]
    # 14 fixture rows across two pages; the record without a release date is dropped
    assert len(ids) == 13
    assert "movie:tmdb:999" not in ids
    assert "movie:tmdb:101" in ids and "movie:tmdb:90" in ids


def test_fetch_entities_filters_sorts_and_truncates():
    provider = ListProvider(
        [
            ent("movie:tmdb:3", dt.date(2025, 2, 1)),
            ent("movie:tmdb:9", dt.date(2024, 12, 31)),  # before range
            ent("movie:tmdb:2", dt.date(2025, 1, 5)),
            ent("movie:tmdb:1", dt.date(2025, 2, 1)),
            ent("movie:tmdb:8", dt.date(2025, 9, 1)),  # after range
        ]
    )
    picked = fetch_entities(provider, plain_client(None), RANGE_2025, limit=10)
    assert [e.entity_id for e in picked] == ["movie:tmdb:2", "movie:tmdb:1", "movie:tmdb:3"]

    top2 = fetch_entities(provider, plain_client(None), RANGE_2025, limit=2)
    assert [e.entity_id for e in top2] == ["movie:tmdb:2", "movie:tmdb:1"]


def test_fetch_entities_dedupes_first_wins():
    first = ent("movie:tmdb:1", dt.date(2025, 3, 1))
    shadow = KnowledgeEntity(
        entity_id="movie:tmdb:1",
        domain="movie",
        display_name="shadow copy",
        occurrence_date=dt.date(2025, 4, 1),
        provider_payload={"dup": True},
    )
    picked = fetch_entities(ListProvider([first, shadow]), plain_client(None), RANGE_2025, 10)
    assert picked == [first]


def test_fetch_entities_rejects_bad_limit():
    with pytest.raises(ValueError):
        fetch_entities(ListProvider([]), plain_client(None), RANGE_2025, limit=0)


def test_temporal_filter_boundary_is_inclusive():
    cutoff = dt.date(2024, 6, 1)
    on_boundary = ent("movie:tmdb:1", dt.date(2024, 12, 1))
    day_before = ent("movie:tmdb:2", dt.date(2024, 11, 30))
    kept, dropped = temporal_filter([on_boundary, day_before], cutoff, window_months=6)
    assert kept == [on_boundary]
    assert dropped == [day_before]


@given(
    st.lists(
        st.dates(min_value=dt.date(2023, 1, 1), max_value=dt.date(2026, 12, 31)), max_size=40
    )
)
def test_temporal_filter_is_a_partition(dates):
    cutoff = dt.date(2024, 6, 1)
    earliest = dt.date(2024, 12, 1)
    entities = [ent(f"movie:tmdb:{i}", d) for i, d in enumerate(dates)]
    kept, dropped = temporal_filter(entities, cutoff, window_months=6)
    assert len(kept) + len(dropped) == len(entities)
    assert all(e.occurrence_date >= earliest for e in kept)
    assert all(e.occurrence_date < earliest for e in dropped)
    # relative order within each bucket is preserved
    ids = {e.entity_id: i for i, e in enumerate(entities)}
    assert [ids[e.entity_id] for e in kept] == sorted(ids[e.entity_id] for e in kept)
    assert [ids[e.entity_id] for e in dropped] == sorted(ids[e.entity_id] for e in dropped)


def test_cached_client_memoises_and_preserves_key_order(tmp_path):
    payload = {"page": 1, "results": [{"stats": {"Shots": "9 - 2", "Corners": "4 - 4"}}]}
    transport = CountingTransport({"events?page=1": payload})
    client = CachedClient(transport, "sportsdb", cache_dir=tmp_path)

    first = client.get("events?page=1")
    second = client.get("events?page=1")
    assert transport.calls == 1
    assert second == payload
    assert list(second["results"][0]["stats"]) == ["Shots", "Corners"]

    cache_files = list((tmp_path / "sportsdb").glob("*.json"))
    assert len(cache_files) == 1
    stored = json.loads(cache_files[0].read_text(encoding="utf-8"))
    assert stored["path"] == "events?page=1"
    assert list(stored["response"]["results"][0]["stats"]) == ["Shots", "Corners"]
    assert first == second


def test_cached_client_without_dir_passes_through():
    transport = CountingTransport({"x": {"ok": 1}})
    client = CachedClient(transport, "stub", cache_dir=None)
    client.get("x")
    client.get("x")
    assert transport.calls == 2


def test_sports_provider_dispatches_templates():
    provider = SportsProvider()
    soccer = {
        "event_id": "e1",
        "sport": "Soccer",
        "league": "L",
        "home_team": "H",
        "away_team": "A",
        "date": "2025-01-19",
        "home_score": 2,
        "away_score": 1,
        "stats": {"Possession": "58% - 42%", "Corners": "5 - 1"},
    }
    template_id, fields = provider.document_fields(soccer)
    assert template_id == "sports.soccer.v1"
    # stats lines are sorted so renders do not depend on upstream key order
    assert fields["stats_block"] == "Corners: 5 - 1\nPossession: 58% - 42%"

    baseball = {
        "event_id": "e2",
        "sport": "Baseball",
        "league": "L",
        "home_team": "H",
        "away_team": "A",
        "date": "2025-04-02",
        "home_score": 5,
        "away_score": 3,
        "venue": "Park",
        "home_innings": [1, 0, 2],
        "away_innings": [0, 1, 1],
        "home_hits": 9,
        "home_errors": 1,
        "away_hits": 7,
        "away_errors": 2,
    }
    template_id, fields = provider.document_fields(baseball)
    assert template_id == "sports.baseball.v1"
    assert fields["home_innings"] == "1 0 2"
    assert provider.proper_names(baseball) == ("H", "A", "L", "Park")


def test_fetch_document_renders_template(movie_entity):
    doc = fetch_document(MovieProvider(), movie_entity, "en")
    assert doc.entity_id == movie_entity.entity_id
    assert doc.language == "en"
    assert doc.template_id == "movie.v1"
    assert doc.text.startswith("- Movie Title: Harbor of Glass\n")


def test_provider_registry():
    assert isinstance(provider_for("music"), MusicProvider)
    with pytest.raises(ValueError):
        provider_for("podcast")
