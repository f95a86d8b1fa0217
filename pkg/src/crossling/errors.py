"""Exception taxonomy shared by every pipeline stage."""

from __future__ import annotations


class CrosslingError(Exception):
    """Base class for all errors raised by this package."""


# --- configuration ---------------------------------------------------------


class ValidationError(CrosslingError):
    """A config field violates its contract."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class TemporalConflictError(CrosslingError):
    """time_range starts before knowledge_cutoff + window_months."""


# --- providers -------------------------------------------------------------


class ProviderAuthError(CrosslingError):
    """Provider rejected our credentials (or none were configured)."""


class ProviderUnavailable(CrosslingError):
    """Provider kept failing after bounded retries."""


class MalformedRecord(CrosslingError):
    """A provider item is missing required fields; skipped, never fatal."""


class DocumentUnavailable(CrosslingError):
    """No source document could be built for an entity."""


class TemplateFieldMissing(CrosslingError):
    def __init__(self, field: str):
        super().__init__(field)
        self.field = field


# --- llm gateway -----------------------------------------------------------


class GatewayAuthError(CrosslingError):
    """LLM endpoint rejected our credentials."""


class TransientBackendError(CrosslingError):
    """Retryable transport failure (timeout, 5xx, rate limit)."""


class LlmExhausted(CrosslingError):
    """All retry attempts were spent without a successful response."""


class LlmRefusal(CrosslingError):
    """The model returned empty or blocked content."""


class JsonNotFound(CrosslingError):
    """No JSON object present in the model output."""


class JsonMalformed(CrosslingError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class MissingPlaceholder(CrosslingError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


# --- gate / qa / translation -----------------------------------------------


class JudgeUnparseable(CrosslingError):
    """Judge or verifier output is not in the required JSON shape."""


class GenerationFailed(CrosslingError):
    """QA generation for a document failed twice in a row."""


class IntegrityViolation(CrosslingError):
    """A translation failed mechanical structure checks."""

    def __init__(self, codes: list[str]):
        super().__init__(", ".join(codes))
        self.codes = list(codes)


class IncompleteCoverage(CrosslingError):
    """An entity lacks a document in some configured language."""


# --- evaluation ------------------------------------------------------------


class EmptyJoin(CrosslingError):
    """Source and target gradings share no base qa ids."""


class EmptyMatrix(CrosslingError):
    """Contingency matrix has zero graded items."""


class NoSourceCorrect(CrosslingError):
    """A + B = 0: transfer score is undefined for this pair."""


class NothingToAggregate(CrosslingError):
    """Every pair score was undefined."""


class ManifestMismatch(CrosslingError):
    """Dataset content hashes do not match the manifest."""


class MissingPredictions(CrosslingError):
    """Required model/domain/pair cells have no graded predictions."""

    def __init__(self, cells: list[str]):
        super().__init__(", ".join(cells))
        self.cells = list(cells)


class TrainerUnavailable(CrosslingError):
    """The trainer adapter command could not be invoked."""
