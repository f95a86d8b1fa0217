"""Per-domain document templates and prompt profiles.

The template text is the canonical grounding format: rendering is
byte-deterministic and substitutes field values verbatim, so a document can
be mechanically re-rendered after value translation without touching its
labels or line structure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import TemplateFieldMissing
from .records import DOMAINS

_FIELD = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class DocTemplate:
    template_id: str
    domain: str
    body: str
    multiline_fields: tuple[str, ...] = ()

    @property
    def fields(self) -> tuple[str, ...]:
        seen: list[str] = []
        for name in _FIELD.findall(self.body):
            if name not in seen:
                seen.append(name)
        return tuple(seen)

    def render(self, fields: dict) -> str:
        def substitute(match: re.Match) -> str:
            name = match.group(1)
            if name not in fields or fields[name] is None:
                raise TemplateFieldMissing(name)
            value = str(fields[name])
            if name not in self.multiline_fields:
                # single-line fields keep the template's line structure intact
                value = " ".join(value.split())
            return value

        return _FIELD.sub(substitute, self.body)


MOVIE_TEMPLATE = DocTemplate(
    template_id="movie.v1",
    domain="movie",
    body=(
        "- Movie Title: {title}\n"
        "- Movie Cast: {casts}\n"
        "- Movie Summary: {summary}\n"
        "- Movie Synopsis: {synopsis}"
    ),
)

MUSIC_TEMPLATE = DocTemplate(
    template_id="music.v1",
    domain="music",
    body=(
        "- Music Video Title: {title}\n"
        "- Music Release Date: {date}\n"
        "- Music Video Description: {description}"
    ),
)

SOCCER_TEMPLATE = DocTemplate(
    template_id="sports.soccer.v1",
    domain="sports",
    body=(
        "Sports: {sports}\n"
        "League: {league}\n"
        "Match: {home_team} vs {away_team}\n"
        "Date: {date}\n"
        "Score: {home_score} - {away_score}\n"
        "Match Stats ({home_team} vs {away_team}):\n"
        "{stats_block}"
    ),
    multiline_fields=("stats_block",),
)

BASEBALL_TEMPLATE = DocTemplate(
    template_id="sports.baseball.v1",
    domain="sports",
    body=(
        "Sports: {sports}\n"
        "League: {league}\n"
        "\n"
        "Match: {home_team} vs {away_team}\n"
        "Date: {date}\n"
        "Score: {home_score} - {away_score}\n"
        "Venue: {venue}\n"
        "\n"
        "Innings Breakdown:\n"
        "{home_team}: {home_innings} → Hits: {home_hits}, Errors: {home_errors}\n"
        "{away_team}: {away_innings} → Hits: {away_hits}, Errors: {away_errors}"
    ),
)

TEMPLATES = {
    t.template_id: t
    for t in (MOVIE_TEMPLATE, MUSIC_TEMPLATE, SOCCER_TEMPLATE, BASEBALL_TEMPLATE)
}


def template_for(domain: str, fields: dict) -> DocTemplate:
    if domain == "movie":
        return MOVIE_TEMPLATE
    if domain == "music":
        return MUSIC_TEMPLATE
    if domain == "sports":
        kind = str(fields.get("sports", "")).strip().lower()
        if kind == "baseball":
            return BASEBALL_TEMPLATE
        if kind == "soccer":
            return SOCCER_TEMPLATE
        raise TemplateFieldMissing("sports")
    raise ValueError(f"unknown domain {domain!r} (expected one of {DOMAINS})")


def render_document(domain: str, fields: dict) -> str:
    """Render the canonical document text for a domain field map."""
    return template_for(domain, fields).render(fields)


_LABEL_LINE = re.compile(r"^(- )?([^:]+): ?(.*)$")


def parse_labeled_lines(text: str) -> dict[str, str]:
    """Extract ``label -> value`` for every 'Label: value' line.

    Later duplicates do not overwrite earlier labels; unlabeled lines are
    ignored. This is the inverse used by the mock backend and integrity
    checks, not a general parser.
    """
    out: dict[str, str] = {}
    for line in text.splitlines():
        m = _LABEL_LINE.match(line)
        if m:
            label = m.group(2).strip()
            if label and label not in out:
                out[label] = m.group(3).strip()
    return out


@dataclass(frozen=True)
class DomainProfile:
    """Phrasing and translation metadata the prompts need per domain."""

    domain: str
    noun: str
    provided_fields: tuple[str, ...]
    question_lead: str
    aspect_hint: str
    # (template field key, document line label, translation output key)
    translated_fields: tuple[tuple[str, str, str], ...]


PROFILES: dict[str, DomainProfile] = {
    "movie": DomainProfile(
        domain="movie",
        noun="movie",
        provided_fields=("Movie Title", "Movie Casts", "Movie Summary", "Movie Synopsis"),
        question_lead="“In the movie: '<title>', …”",
        aspect_hint="casts, summary, synopsis content",
        translated_fields=(
            ("casts", "- Movie Cast", "Cast"),
            ("summary", "- Movie Summary", "Summary"),
            ("synopsis", "- Movie Synopsis", "Synopsis"),
        ),
    ),
    "music": DomainProfile(
        domain="music",
        noun="music video",
        provided_fields=("Music Video Title", "Music Release Date", "Music Video Description"),
        question_lead="“In the music video: '<title>', …”",
        aspect_hint="release date, description content",
        translated_fields=(("description", "- Music Video Description", "Description"),),
    ),
    "sports": DomainProfile(
        domain="sports",
        noun="sports game",
        provided_fields=("Sports", "League", "Match", "Date", "Score", "Match Details"),
        question_lead="“In the sports game: '<title>', …”",
        aspect_hint="score, venue, league, match details",
        translated_fields=(("sports", "Sports", "Sports"),),
    ),
}
