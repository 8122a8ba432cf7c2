"""LLM-driven filter generation and the three-tier retrieval cascade.

Tier order is fixed: a strict filter from the LLM, then a loose
(food-group-only) filter from a second LLM call, then pure semantic search.
A success at any tier stops the cascade; every attempt is logged with the
verbatim LLM response for auditability.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Protocol, Sequence, Union

import numpy as np

from .filters import (
    FieldSchema,
    FilterError,
    FilterErrorKind,
    FilterExpr,
    MATCH_ALL,
    MatchAll,
    loose_projection,
    parse_filter,
)
from .store import RetrievalResult, Tier, VectorStore
from .transport import BackendUnavailable, auth_headers, post_json

logger = logging.getLogger(__name__)

STRICT_ATTEMPT = 0
LOOSE_ATTEMPT = 1


class LlmBackend(Protocol):
    """Completion backend; `attempt` is 0 for the strict call, 1 for loose."""

    kind: str

    def complete(self, prompt: str, question: str, attempt: int) -> str: ...


class EmbeddingBackend(Protocol):
    kind: str
    dimension: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class ScriptedLlmBackend:
    """Deterministic test double: question -> ordered response list.

    Index 0 answers the strict attempt, index 1 the loose attempt; a
    too-short list repeats its last entry. Lookups are stateless, so a
    repeated question always replays the same script.
    """

    kind = "scripted"

    def __init__(self, responses: Mapping[str, Sequence[str]]):
        self._responses = {q: list(r) for q, r in responses.items()}

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedLlmBackend":
        with open(path, encoding="utf-8") as handle:
            return cls(json.load(handle))

    def complete(self, prompt: str, question: str, attempt: int) -> str:
        script = self._responses.get(question)
        if not script:
            raise BackendUnavailable(f"no scripted response for question: {question!r}")
        return script[min(attempt, len(script) - 1)]


class RemoteLlmBackend:
    """Chat-completion-style HTTP client with a max-in-flight cap.

    Request:  POST {endpoint} {"model": .., "messages": [{"role": "user",
              "content": prompt}], "temperature": ..}
    Response: {"choices": [{"message": {"content": "..."}}]}
    """

    kind = "remote"

    def __init__(
        self,
        endpoint: str,
        model: str,
        auth_env: str = "LLM_API_TOKEN",
        temperature: float = 0.0,
        timeout: float = 30.0,
        max_retries: int = 2,
        max_in_flight: int = 4,
    ):
        self.endpoint = endpoint
        self.model = model
        self.auth_env = auth_env
        self.temperature = temperature
        self.timeout = timeout
        self.max_retries = max_retries
        self._in_flight = threading.Semaphore(max_in_flight)

    def complete(self, prompt: str, question: str, attempt: int) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        }
        with self._in_flight:
            data = post_json(
                self.endpoint,
                payload,
                headers=auth_headers(self.auth_env),
                timeout=self.timeout,
                max_retries=self.max_retries,
            )
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise BackendUnavailable(
                f"{self.endpoint}: unexpected completion response shape"
            ) from None
        if not isinstance(content, str):
            raise BackendUnavailable(f"{self.endpoint}: completion content is not text")
        return content


@dataclass(frozen=True)
class PromptSpec:
    """Prompt templates for strict and loose filter generation.

    Slots are literal tokens replaced on render: {field_names} (the strict
    template must enumerate every schema field) and {question}. Plain
    token replacement, not str.format, so JSON examples with braces and
    $-operators survive in the template text.
    """

    strict_template: str
    loose_template: str

    def __post_init__(self):
        for name, template in (("strict", self.strict_template), ("loose", self.loose_template)):
            if "{question}" not in template:
                raise ValueError(f"{name} template is missing the {{question}} slot")
        if "{field_names}" not in self.strict_template:
            raise ValueError("strict template is missing the {field_names} slot")

    @classmethod
    def default(cls) -> "PromptSpec":
        prompts = resources.files("foodrag") / "prompts"
        return cls(
            strict_template=(prompts / "strict.txt").read_text(encoding="utf-8"),
            loose_template=(prompts / "loose.txt").read_text(encoding="utf-8"),
        )

    @classmethod
    def from_files(cls, strict_path: Union[str, Path], loose_path: Union[str, Path]) -> "PromptSpec":
        return cls(
            strict_template=Path(strict_path).read_text(encoding="utf-8"),
            loose_template=Path(loose_path).read_text(encoding="utf-8"),
        )

    @staticmethod
    def _field_listing(schema: FieldSchema) -> str:
        lines = []
        for field in schema.describe():
            unit = f", {field['unit']}" if field["unit"] else ""
            lines.append(f"- \"{field['name']}\" ({field['kind']}{unit})")
        return "\n".join(lines)

    def render_strict(self, question: str, schema: FieldSchema) -> str:
        return self.strict_template.replace(
            "{field_names}", self._field_listing(schema)
        ).replace("{question}", question)

    def render_loose(self, question: str, schema: FieldSchema) -> str:
        return self.loose_template.replace(
            "{field_names}", self._field_listing(schema)
        ).replace("{question}", question)


def sanitize_response(text: str) -> str:
    """Extract the first balanced top-level {...} block from LLM output.

    Strips code fences and surrounding prose by construction; the content
    inside the outermost braces is returned untouched. With no balanced
    block, the stripped original is returned (and will fail parsing).
    """
    start = text.find("{")
    if start < 0:
        return text.strip()
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return text.strip()


def generate_strict(
    question: str, schema: FieldSchema, llm: LlmBackend, prompts: PromptSpec
) -> tuple[FilterExpr, str]:
    """Ask the LLM for a strict filter; returns (filter, raw response).

    Raises FilterError (with raw_response attached) when the response does
    not parse or validate, BackendUnavailable when the LLM cannot answer.
    """
    raw = llm.complete(prompts.render_strict(question, schema), question, STRICT_ATTEMPT)
    try:
        return parse_filter(sanitize_response(raw), schema), raw
    except FilterError as err:
        err.raw_response = raw
        raise


def generate_loose(
    question: str, schema: FieldSchema, llm: LlmBackend, prompts: PromptSpec
) -> tuple[FilterExpr, str]:
    """Ask the LLM for a food-group-only filter; returns (filter, raw).

    Anything that constrains another field — or constrains nothing at all —
    is a StructureError: the loose tier exists to narrow by food group.
    """
    raw = llm.complete(prompts.render_loose(question, schema), question, LOOSE_ATTEMPT)
    try:
        expr = parse_filter(sanitize_response(raw), schema)
    except FilterError as err:
        err.raw_response = raw
        raise
    if isinstance(expr, MatchAll) or loose_projection(expr) != expr:
        err = FilterError(
            FilterErrorKind.STRUCTURE,
            "",
            "loose filter must reference only the food group field",
        )
        err.raw_response = raw
        raise err
    return expr, raw


@dataclass(frozen=True)
class Attempt:
    """One cascade step: which tier, what the LLM said, what went wrong."""

    tier: Tier
    raw_response: str | None
    error: Exception | None
    duration_s: float


@dataclass(frozen=True)
class CascadeOutcome:
    result: RetrievalResult
    attempts: tuple[Attempt, ...]


class CascadeRetriever:
    """One configured retrieval pipeline: store + schema + backends + threshold.

    Shareable across threads; each retrieve() call is independent.
    """

    def __init__(
        self,
        *,
        schema: FieldSchema,
        store: VectorStore,
        llm: LlmBackend,
        embedder: EmbeddingBackend,
        threshold: float,
        prompts: PromptSpec | None = None,
        limit: int | None = None,
    ):
        self.schema = schema
        self.store = store
        self.llm = llm
        self.embedder = embedder
        self.threshold = threshold
        self.prompts = prompts or PromptSpec.default()
        self.limit = limit

    def retrieve(self, question: str) -> CascadeOutcome:
        """Run the cascade: Strict, then Loose, then pure Semantic.

        Raises BackendUnavailable only when even the semantic tier cannot
        embed the question; filter-generation failures of any kind fall
        through to the next tier instead.
        """
        attempts: list[Attempt] = []

        started = time.perf_counter()
        try:
            flt, raw = generate_strict(question, self.schema, self.llm, self.prompts)
        except (FilterError, BackendUnavailable) as err:
            attempts.append(self._attempt(Tier.STRICT, err, started))
            logger.debug("strict filter failed for %r: %s", question, err)
        else:
            result = self.store.query_filtered(flt, self.limit)
            attempts.append(Attempt(Tier.STRICT, raw, None, time.perf_counter() - started))
            return CascadeOutcome(result, tuple(attempts))

        started = time.perf_counter()
        try:
            flt, raw = generate_loose(question, self.schema, self.llm, self.prompts)
        except (FilterError, BackendUnavailable) as err:
            attempts.append(self._attempt(Tier.LOOSE, err, started))
            logger.debug("loose filter failed for %r: %s", question, err)
        else:
            query_vector = self._embed(question, attempts, Tier.LOOSE, raw, started)
            result = self.store.query_semantic(query_vector, flt, self.threshold, self.limit)
            attempts.append(Attempt(Tier.LOOSE, raw, None, time.perf_counter() - started))
            return CascadeOutcome(result, tuple(attempts))

        started = time.perf_counter()
        query_vector = self._embed(question, attempts, Tier.SEMANTIC, None, started)
        result = self.store.query_semantic(query_vector, MATCH_ALL, self.threshold, self.limit)
        attempts.append(Attempt(Tier.SEMANTIC, None, None, time.perf_counter() - started))
        return CascadeOutcome(result, tuple(attempts))

    def _embed(self, question, attempts, tier, raw, started) -> np.ndarray:
        # A failed embedding dooms the semantic tier too (same call), so it
        # is the one cascade error that propagates.
        try:
            return self.embedder.embed([question])[0]
        except BackendUnavailable as err:
            elapsed = time.perf_counter() - started
            attempts.append(Attempt(tier, raw, err, elapsed))
            if tier is not Tier.SEMANTIC:
                attempts.append(Attempt(Tier.SEMANTIC, None, err, 0.0))
            raise

    @staticmethod
    def _attempt(tier: Tier, err: Exception, started: float) -> Attempt:
        raw = getattr(err, "raw_response", None)
        return Attempt(tier, raw, err, time.perf_counter() - started)


def retrieve_with_cascade(
    question: str,
    *,
    store: VectorStore,
    schema: FieldSchema,
    llm: LlmBackend,
    embedder: EmbeddingBackend,
    threshold: float,
    prompts: PromptSpec | None = None,
    limit: int | None = None,
) -> CascadeOutcome:
    retriever = CascadeRetriever(
        schema=schema,
        store=store,
        llm=llm,
        embedder=embedder,
        threshold=threshold,
        prompts=prompts,
        limit=limit,
    )
    return retriever.retrieve(question)
