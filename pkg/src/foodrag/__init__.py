"""foodrag: natural-language retrieval over food-composition data.

A questions goes through an LLM that generates a metadata filter, a
two-stage vector-store query (filter restriction, then thresholded
semantic search), and a three-tier fallback cascade; an evaluation harness
scores retrieval quality with precision/recall/F1 against ground truth.
"""

from .corpus import FoodItem, SerializedItem, build_schema, ingest, serialize
from .embeddings import (
    DeterministicEmbeddingBackend,
    DistanceStats,
    RemoteEmbeddingBackend,
    calibrate,
    cosine_distance,
)
from .evalharness import (
    Difficulty,
    EvalReport,
    Metrics,
    QuestionCase,
    load_questions,
    render_report,
    run_suite,
    score,
)
from .filters import (
    FieldKind,
    FieldSchema,
    FilterError,
    FilterErrorKind,
    FilterExpr,
    MATCH_ALL,
    evaluate,
    loose_projection,
    parse_filter,
    to_document,
)
from .filtergen import (
    CascadeOutcome,
    CascadeRetriever,
    PromptSpec,
    RemoteLlmBackend,
    ScriptedLlmBackend,
    generate_loose,
    generate_strict,
    retrieve_with_cascade,
    sanitize_response,
)
from .store import RetrievalResult, StoreEntry, Tier, VectorStore
from .transport import BackendUnavailable

__version__ = "0.1.0"

__all__ = [
    "BackendUnavailable",
    "CascadeOutcome",
    "CascadeRetriever",
    "DeterministicEmbeddingBackend",
    "Difficulty",
    "DistanceStats",
    "EvalReport",
    "FieldKind",
    "FieldSchema",
    "FilterError",
    "FilterErrorKind",
    "FilterExpr",
    "FoodItem",
    "MATCH_ALL",
    "Metrics",
    "PromptSpec",
    "QuestionCase",
    "RemoteEmbeddingBackend",
    "RemoteLlmBackend",
    "RetrievalResult",
    "ScriptedLlmBackend",
    "SerializedItem",
    "StoreEntry",
    "Tier",
    "VectorStore",
    "build_schema",
    "calibrate",
    "cosine_distance",
    "evaluate",
    "generate_loose",
    "generate_strict",
    "ingest",
    "load_questions",
    "loose_projection",
    "parse_filter",
    "render_report",
    "retrieve_with_cascade",
    "run_suite",
    "sanitize_response",
    "score",
    "serialize",
    "to_document",
]
