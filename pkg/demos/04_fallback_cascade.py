"""The three-tier retrieval cascade under fault injection.

A scripted LLM stands in for the real one so each fallback path can be
forced deterministically: a valid strict filter, a broken strict filter
with a valid loose one, and a total filter failure.
"""

from importlib import resources

from foodrag import (
    CascadeRetriever,
    DeterministicEmbeddingBackend,
    ScriptedLlmBackend,
    StoreEntry,
    VectorStore,
    build_schema,
    calibrate,
    ingest,
    serialize,
)

corpus_file = resources.files("foodrag") / "data" / "fixture_corpus.jsonl"
with resources.as_file(corpus_file) as path:
    items = ingest(path)
schema = build_schema(items)

backend = DeterministicEmbeddingBackend(dimension=64, seed=0)
sentences = [serialize(item) for item in items]
vectors = backend.embed([s.sentence for s in sentences])
store = VectorStore()
store.upsert(
    StoreEntry(item_id=item.id, metadata=item.metadata(),
               vector=vectors[i], sentence=sentences[i].sentence)
    for i, item in enumerate(items)
)
store.freeze()
threshold = calibrate(store.vectors()).thresholds()[1]  # mu
print(f"store: {len(store)} items, threshold {threshold:.4f}\n")

script = {
    # strict attempt succeeds: pure metadata retrieval
    "Which foods have more than 12 g of protein?":
        ['{"protein, total": {"$gt": 12}}'],
    # strict attempt broken, loose attempt names the food group
    "Which cheeses pair well with wine?":
        ["I cannot express taste as a filter.", '{"food group": "Cheeses"}'],
    # both attempts fail: pure semantic search is the fail-safe
    "Something nutritious for a hiking trip?":
        ["no filter comes to mind", "still no filter"],
}

retriever = CascadeRetriever(
    schema=schema, store=store, llm=ScriptedLlmBackend(script),
    embedder=backend, threshold=threshold,
)

for question in script:
    outcome = retriever.retrieve(question)
    result = outcome.result
    print(f"Q: {question}")
    print(f"  tier: {result.tier.value}   items: {len(result.items)}"
          f"   threshold: {result.threshold_used}")
    for attempt in outcome.attempts:
        status = "ok" if attempt.error is None else type(attempt.error).__name__
        print(f"  attempt {attempt.tier.value}: {status}")
    top = [item_id for item_id, _ in result.items[:3]]
    print(f"  first items: {top}\n")
