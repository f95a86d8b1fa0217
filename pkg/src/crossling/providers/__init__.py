"""Entity providers, transports, and the response cache."""

from .base import EntityProvider, fetch_document, fetch_entities, temporal_filter
from .catalog import PROVIDERS, MovieProvider, MusicProvider, SportsProvider, provider_for
from .transport import CachedClient, FixtureTransport, HttpTransport, fixture_name

__all__ = [
    "CachedClient",
    "EntityProvider",
    "FixtureTransport",
    "HttpTransport",
    "MovieProvider",
    "MusicProvider",
    "PROVIDERS",
    "SportsProvider",
    "fetch_document",
    "fetch_entities",
    "fixture_name",
    "provider_for",
    "temporal_filter",
]
