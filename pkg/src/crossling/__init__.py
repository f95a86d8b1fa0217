"""crossling: contamination-free cross-lingual knowledge-transfer benchmarks.

Builds multilingual MCQA benchmarks from time-sensitive real-world entities
(movies, music, sports) that post-date a model's knowledge cutoff, and
scores knowledge-injected models with contingency-based transfer metrics.
"""

from .assemble import BenchmarkDataset, assemble, load_dataset, serialize, stats, verify_manifest
from .config import LlmSettings, PipelineConfig, ProviderSettings, load_config, validate_config
from .errors import CrosslingError
from .evaluate import Prediction, evaluate_predictions, run_evaluation
from .metrics import (
    Aggregate,
    ContingencyMatrix,
    aggregate_scores,
    build_contingency,
    grade_answer,
    overall_score,
    transfer_score,
)
from .pipeline import Pipeline, generate
from .records import FactQA, KnowledgeEntity, SourceDocument

__version__ = "1.0.0"

__all__ = [
    "Aggregate",
    "BenchmarkDataset",
    "ContingencyMatrix",
    "CrosslingError",
    "FactQA",
    "KnowledgeEntity",
    "LlmSettings",
    "Pipeline",
    "PipelineConfig",
    "Prediction",
    "ProviderSettings",
    "SourceDocument",
    "__version__",
    "aggregate_scores",
    "assemble",
    "build_contingency",
    "evaluate_predictions",
    "generate",
    "grade_answer",
    "load_config",
    "load_dataset",
    "overall_score",
    "run_evaluation",
    "serialize",
    "stats",
    "transfer_score",
    "validate_config",
    "verify_manifest",
]
