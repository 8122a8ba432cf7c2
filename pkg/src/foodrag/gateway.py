"""Service wiring: configuration, engine assembly, and the HTTP API.

The CLI and the HTTP service share one Engine, so a question asked over
either surface goes through the identical cascade and returns the same
items. Configuration is a JSON file; string values may interpolate
environment variables as ${VAR} (secrets never live in the file itself).
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import corpus as corpus_mod
from .corpus import FoodItem
from .embeddings import (
    DEFAULT_EXACT_LIMIT,
    DeterministicEmbeddingBackend,
    DistanceStats,
    RemoteEmbeddingBackend,
    calibrate,
)
from .filters import FieldSchema, to_document
from .filtergen import (
    CascadeRetriever,
    PromptSpec,
    RemoteLlmBackend,
    ScriptedLlmBackend,
)
from .store import DEFAULT_QUERY_LIMIT, StoreEntry, VectorStore
from .transport import BackendUnavailable


class ConfigError(Exception):
    pass


_ENV_PATTERN = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def _interpolate(value):
    if isinstance(value, str):
        def replace(match):
            name = match.group(1)
            if name not in os.environ:
                raise ConfigError(f"environment variable {name} is not set")
            return os.environ[name]

        return _ENV_PATTERN.sub(replace, value)
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    return value


@dataclass
class AppConfig:
    """Resolved application configuration.

    `threshold` is either a number or 'calibrated:t1'|'t2'|'t3', picking
    mu-sigma, mu or mu+sigma from a calibration run over the store.
    """

    corpus_path: Path
    snapshot_path: Path | None = None
    embedding: dict = field(
        default_factory=lambda: {"kind": "deterministic", "dimension": 64, "seed": 0}
    )
    llm: dict = field(default_factory=lambda: {"kind": "scripted", "responses": {}})
    prompt_strict_path: Path | None = None
    prompt_loose_path: Path | None = None
    threshold: Union[float, str] = "calibrated:t2"
    store_limit: int = DEFAULT_QUERY_LIMIT
    bind: str = "127.0.0.1:8000"
    calibration: dict = field(
        default_factory=lambda: {"sample_pairs": None, "seed": 0, "exact_limit": DEFAULT_EXACT_LIMIT}
    )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "AppConfig":
        """Read a JSON config file; relative paths resolve against its directory."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        raw = _interpolate(raw)
        base = path.parent

        def resolve(key):
            value = raw.get(key)
            if value is None:
                return None
            return (base / value).resolve()

        if "corpus" not in raw:
            raise ConfigError("config is missing 'corpus'")
        prompts = raw.get("prompts") or {}
        config = cls(
            corpus_path=(base / raw["corpus"]).resolve(),
            snapshot_path=resolve("snapshot"),
            embedding=raw.get("embedding") or {"kind": "deterministic", "dimension": 64, "seed": 0},
            llm=raw.get("llm") or {"kind": "scripted", "responses": {}},
            prompt_strict_path=(base / prompts["strict"]).resolve() if prompts.get("strict") else None,
            prompt_loose_path=(base / prompts["loose"]).resolve() if prompts.get("loose") else None,
            threshold=raw.get("threshold", "calibrated:t2"),
            store_limit=raw.get("store_limit", DEFAULT_QUERY_LIMIT),
            bind=raw.get("bind", "127.0.0.1:8000"),
            calibration={
                "sample_pairs": None,
                "seed": 0,
                "exact_limit": DEFAULT_EXACT_LIMIT,
                **(raw.get("calibration") or {}),
            },
        )
        if config.llm.get("kind") == "scripted" and isinstance(config.llm.get("responses"), str):
            config.llm = {
                **config.llm,
                "responses": str((base / config.llm["responses"]).resolve()),
            }
        return config


def build_embedding_backend(config: dict):
    kind = config.get("kind", "deterministic")
    if kind == "deterministic":
        return DeterministicEmbeddingBackend(
            dimension=config.get("dimension", 64), seed=config.get("seed", 0)
        )
    if kind == "remote":
        try:
            return RemoteEmbeddingBackend(
                endpoint=config["endpoint"],
                model=config["model"],
                dimension=config.get("dimension", 3072),
                auth_env=config.get("auth_env", "EMBED_API_TOKEN"),
                timeout=config.get("timeout", 30.0),
                max_retries=config.get("max_retries", 2),
            )
        except KeyError as exc:
            raise ConfigError(f"remote embedding config is missing {exc}") from None
    raise ConfigError(f"unknown embedding backend kind: {kind!r}")


def build_llm_backend(config: dict):
    kind = config.get("kind", "scripted")
    if kind == "scripted":
        responses = config.get("responses", {})
        if isinstance(responses, str):
            return ScriptedLlmBackend.from_file(responses)
        return ScriptedLlmBackend(responses)
    if kind == "remote":
        try:
            return RemoteLlmBackend(
                endpoint=config["endpoint"],
                model=config["model"],
                auth_env=config.get("auth_env", "LLM_API_TOKEN"),
                temperature=config.get("temperature", 0.0),
                timeout=config.get("timeout", 30.0),
                max_retries=config.get("max_retries", 2),
                max_in_flight=config.get("max_in_flight", 4),
            )
        except KeyError as exc:
            raise ConfigError(f"remote llm config is missing {exc}") from None
    raise ConfigError(f"unknown llm backend kind: {kind!r}")


def load_prompts(config: AppConfig) -> PromptSpec:
    if config.prompt_strict_path and config.prompt_loose_path:
        return PromptSpec.from_files(config.prompt_strict_path, config.prompt_loose_path)
    if config.prompt_strict_path or config.prompt_loose_path:
        raise ConfigError("prompts must configure both 'strict' and 'loose' or neither")
    return PromptSpec.default()


def embed_and_upsert(items, embedder, store: VectorStore, batch_size: int = 64) -> int:
    """Serialize items, embed the sentences in batches, upsert everything."""
    serialized = [corpus_mod.serialize(item) for item in items]
    for start in range(0, len(serialized), batch_size):
        batch = serialized[start : start + batch_size]
        vectors = embedder.embed([s.sentence for s in batch])
        store.upsert(
            StoreEntry(
                item_id=s.item_id,
                metadata=item.metadata(),
                vector=vectors[i],
                sentence=s.sentence,
            )
            for i, (s, item) in enumerate(
                zip(batch, items[start : start + batch_size])
            )
        )
    return len(store)


def resolve_threshold(
    setting: Union[float, str], store: VectorStore, calibration: dict
) -> tuple[float, DistanceStats | None]:
    if isinstance(setting, (int, float)) and not isinstance(setting, bool):
        value = float(setting)
        if not 0.0 < value <= 2.0:
            raise ConfigError(f"threshold must be in (0, 2], got {value}")
        return value, None
    if isinstance(setting, str) and setting.startswith("calibrated:"):
        pick = setting.split(":", 1)[1]
        index = {"t1": 0, "t2": 1, "t3": 2}.get(pick)
        if index is None:
            raise ConfigError("calibrated threshold must be one of t1, t2, t3")
        stats = calibrate(
            store.vectors(),
            sample_pairs=calibration.get("sample_pairs"),
            seed=calibration.get("seed", 0),
            exact_limit=calibration.get("exact_limit", DEFAULT_EXACT_LIMIT),
        )
        return stats.thresholds()[index], stats
    raise ConfigError(f"unresolvable threshold setting: {setting!r}")


@dataclass
class Engine:
    """Everything a query needs; shared by the CLI and the HTTP service."""

    config: AppConfig
    schema: FieldSchema
    store: VectorStore
    items_by_id: dict[str, FoodItem]
    retriever: CascadeRetriever
    threshold: float
    stats: DistanceStats | None

    def query(self, question: str) -> dict:
        """Run the cascade once; returns the wire-format response payload."""
        started = time.perf_counter()
        outcome = self.retriever.retrieve(question)
        items = []
        for item_id, distance in outcome.result.items:
            item = self.items_by_id.get(item_id)
            items.append(
                {
                    "id": item_id,
                    "name": item.name if item else item_id,
                    "food_group": item.food_group if item else None,
                    "components": dict(item.components) if item else {},
                    "distance": distance,
                }
            )
        return {
            "filter_document": to_document(outcome.result.filter_used),
            "tier": outcome.result.tier.value,
            "threshold_used": outcome.result.threshold_used,
            "items": items,
            "attempts": [
                {"tier": a.tier.value, "error": str(a.error) if a.error else None}
                for a in outcome.attempts
            ],
            "duration_ms": (time.perf_counter() - started) * 1000.0,
        }

    def food_groups(self) -> list[str]:
        return sorted({item.food_group for item in self.items_by_id.values()})


def build_engine(config: AppConfig) -> Engine:
    """Load corpus (+ snapshot if present), build backends, resolve threshold."""
    items = corpus_mod.ingest(config.corpus_path)
    schema = corpus_mod.build_schema(items)
    embedder = build_embedding_backend(config.embedding)

    if config.snapshot_path and Path(config.snapshot_path).exists():
        store = VectorStore.load_snapshot(config.snapshot_path, default_limit=config.store_limit)
        if store.dimension is not None and store.dimension != embedder.dimension:
            raise ConfigError(
                f"snapshot dimension {store.dimension} does not match embedding"
                f" backend dimension {embedder.dimension}"
            )
    else:
        store = VectorStore(default_limit=config.store_limit)
        embed_and_upsert(items, embedder, store)
    store.freeze()

    threshold, stats = resolve_threshold(config.threshold, store, config.calibration)
    llm = build_llm_backend(config.llm)
    prompts = load_prompts(config)
    retriever = CascadeRetriever(
        schema=schema,
        store=store,
        llm=llm,
        embedder=embedder,
        threshold=threshold,
        prompts=prompts,
        limit=config.store_limit,
    )
    return Engine(
        config=config,
        schema=schema,
        store=store,
        items_by_id={item.id: item for item in items},
        retriever=retriever,
        threshold=threshold,
        stats=stats,
    )


def create_app(engine: Engine | None = None) -> FastAPI:
    """The HTTP API. With engine=None (nothing ingested) everything is 503."""
    app = FastAPI(title="foodrag gateway")
    # the console is served separately; the API is open and unauthenticated
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.engine = engine

    def _engine() -> Engine | None:
        return app.state.engine

    @app.get("/api/health")
    def health():
        engine = _engine()
        if engine is None:
            return JSONResponse({"status": "not ready"}, status_code=503)
        return {
            "status": "ok",
            "store_size": len(engine.store),
            "backend_kinds": {
                "llm": engine.retriever.llm.kind,
                "embedding": engine.retriever.embedder.kind,
            },
        }

    @app.get("/api/groups")
    def groups():
        engine = _engine()
        if engine is None:
            return JSONResponse({"status": "not ready"}, status_code=503)
        return {"groups": engine.food_groups()}

    @app.get("/api/schema")
    def schema():
        engine = _engine()
        if engine is None:
            return JSONResponse({"status": "not ready"}, status_code=503)
        return {"fields": engine.schema.describe()}

    @app.post("/api/query")
    async def query(request: Request):
        engine = _engine()
        if engine is None:
            return JSONResponse({"status": "not ready"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "request body must be JSON"}, status_code=400)
        question = body.get("question") if isinstance(body, dict) else None
        if not isinstance(question, str) or not question.strip():
            return JSONResponse(
                {"error": "request must carry a non-empty 'question'"}, status_code=400
            )
        try:
            return engine.query(question)
        except BackendUnavailable as exc:
            return JSONResponse({"error": str(exc)}, status_code=502)

    return app
