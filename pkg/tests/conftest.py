from __future__ import annotations

import datetime as dt
from pathlib import Path

import pytest

from crossling.config import LlmSettings, PipelineConfig, ProviderSettings
from crossling.llm.gateway import LlmGateway
from crossling.llm.mock import MockBackend
from crossling.pipeline import Pipeline
from crossling.records import FactQA, KnowledgeEntity, SourceDocument

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

KNOWN_ENTITIES = (
    "The Silent Meridian",
    "Glass Harvest",
    "Peach Static",
    "Slow Rooms",
    "Lantern City vs Bridgefield United 2025-03-08",
)

# entity ids in the fixtures dated before the admissible window
PRE_WINDOW_IDS = {
    "movie:tmdb:90",
    "movie:tmdb:91",
    "movie:tmdb:92",
    "music:ytmusic:v190",
    "music:ytmusic:v191",
    "music:ytmusic:v192",
    "sports:sportsdb:e290",
    "sports:sportsdb:e291",
    "sports:sportsdb:e292",
}


@pytest.fixture()
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture()
def mock_gateway() -> LlmGateway:
    settings = LlmSettings(backend="mock", mock_known_entities=KNOWN_ENTITIES)
    return LlmGateway(MockBackend(known_entities=KNOWN_ENTITIES), settings)


@pytest.fixture()
def movie_entity() -> KnowledgeEntity:
    return KnowledgeEntity(
        entity_id="movie:tmdb:500",
        domain="movie",
        display_name="Harbor of Glass",
        occurrence_date=dt.date(2025, 3, 1),
        provider_payload={
            "id": 500,
            "title": "Harbor of Glass",
            "release_date": "2025-03-01",
            "cast": ["Nadia Osei", "Viktor Brandt"],
            "summary": "A lighthouse keeper inventories a shipwreck's cargo of mirrors.",
            "synopsis": "Keeper Ilsa Brandt catalogs four hundred mirrors from the wreck of the Meridian Star and notices her reflection lags in one of them.",
        },
    )


@pytest.fixture()
def movie_document(movie_entity) -> SourceDocument:
    from crossling.providers.base import fetch_document
    from crossling.providers.catalog import MovieProvider

    return fetch_document(MovieProvider(), movie_entity, "en")


def make_qa(
    base: str = "deadbeefdeadbeef",
    lang: str = "en",
    entity_id: str = "movie:tmdb:500",
    correct: str = "B",
    status: str = "verified",
) -> FactQA:
    options = {
        "A": f"{base} option alpha",
        "B": f"{base} option bravo",
        "C": f"{base} option charlie",
        "D": f"{base} option delta",
    }
    return FactQA(
        qa_id=f"{base}.{lang}",
        entity_id=entity_id,
        language=lang,
        question=f"In the movie: 'Harbor of Glass', what is recorded for {base}?",
        options=options,
        correct_option=correct,
        status=status,
    )


def build_config(**overrides) -> PipelineConfig:
    base = dict(
        target_model_id="demo-target-model",
        knowledge_cutoff=dt.date(2024, 6, 1),
        time_range=(dt.date(2025, 1, 1), dt.date(2025, 8, 31)),
        languages=("en", "ja", "zh", "fr", "es"),
        domains=("movie", "music", "sports"),
        entities_per_domain=10,
        questions_per_entity=6,
        window_months=6,
        seed=7,
        cache_dir="",
        providers={
            "movie": ProviderSettings(name="tmdb", fixture_dir=str(FIXTURES / "providers/tmdb")),
            "music": ProviderSettings(
                name="ytmusic", fixture_dir=str(FIXTURES / "providers/ytmusic")
            ),
            "sports": ProviderSettings(
                name="sportsdb", fixture_dir=str(FIXTURES / "providers/sportsdb")
            ),
        },
        llm=LlmSettings(backend="mock", mock_known_entities=KNOWN_ENTITIES),
    )
    base.update(overrides)
    return PipelineConfig(**base)


@pytest.fixture(scope="session")
def generated_dataset_dir(tmp_path_factory) -> Path:
    """One shared offline pipeline run for tests that only read the output."""
    out = tmp_path_factory.mktemp("dataset") / "out"
    config = build_config()
    Pipeline(config, out, offline=True).run()
    return out


__all__ = ["FIXTURES", "KNOWN_ENTITIES", "PRE_WINDOW_IDS", "build_config", "make_qa"]
