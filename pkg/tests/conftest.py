"""Shared fixtures: the bundled corpus, schema, scripted backend, and a store."""

from __future__ import annotations

import json
from importlib import resources

import pytest

from foodrag.corpus import build_schema, ingest, serialize
from foodrag.embeddings import DeterministicEmbeddingBackend
from foodrag.filtergen import ScriptedLlmBackend
from foodrag.store import StoreEntry, VectorStore

DATA = resources.files("foodrag") / "data"


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory):
    # materialize the packaged corpus so path-based APIs can use it
    target = tmp_path_factory.mktemp("data") / "fixture_corpus.jsonl"
    target.write_text(
        (DATA / "fixture_corpus.jsonl").read_text(encoding="utf-8"), encoding="utf-8"
    )
    return target


@pytest.fixture(scope="session")
def questions_path(tmp_path_factory):
    target = tmp_path_factory.mktemp("data") / "questions_mini.json"
    target.write_text(
        (DATA / "questions_mini.json").read_text(encoding="utf-8"), encoding="utf-8"
    )
    return target


@pytest.fixture(scope="session")
def fixture_items(corpus_path):
    return ingest(corpus_path)


@pytest.fixture(scope="session")
def fixture_schema(fixture_items):
    return build_schema(fixture_items)


@pytest.fixture(scope="session")
def scripted_responses():
    return json.loads((DATA / "scripted_responses.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def scripted_backend(scripted_responses):
    return ScriptedLlmBackend(scripted_responses)


@pytest.fixture(scope="session")
def embedder():
    return DeterministicEmbeddingBackend(dimension=64, seed=0)


def build_store(items, backend) -> VectorStore:
    store = VectorStore()
    sentences = [serialize(item) for item in items]
    vectors = backend.embed([s.sentence for s in sentences])
    store.upsert(
        StoreEntry(
            item_id=item.id,
            metadata=item.metadata(),
            vector=vectors[i],
            sentence=sentences[i].sentence,
        )
        for i, item in enumerate(items)
    )
    return store


@pytest.fixture(scope="session")
def fixture_store(fixture_items, embedder):
    return build_store(fixture_items, embedder).freeze()
