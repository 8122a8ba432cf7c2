"""End-to-end evaluation on the bundled 15-question mini benchmark.

Runs the full grid (3 calibrated thresholds x 5 runs x 15 questions) with
the scripted backend and prints the results table. Easy and Medium land at
exactly 1.000 because the scripted filters equal the ground truth; Hard
questions need comparative reasoning no filter can express, so they fall
back and score partially, mirroring the gap the benchmark is built to show.
"""

from importlib import resources

from foodrag import (
    DeterministicEmbeddingBackend,
    ScriptedLlmBackend,
    StoreEntry,
    VectorStore,
    build_schema,
    calibrate,
    ingest,
    load_questions,
    render_report,
    run_suite,
    serialize,
)

data = resources.files("foodrag") / "data"
with resources.as_file(data / "fixture_corpus.jsonl") as path:
    items = ingest(path)
schema = build_schema(items)

embedder = DeterministicEmbeddingBackend(dimension=64, seed=0)
sentences = [serialize(item) for item in items]
vectors = embedder.embed([s.sentence for s in sentences])
store = VectorStore()
store.upsert(
    StoreEntry(item_id=item.id, metadata=item.metadata(),
               vector=vectors[i], sentence=sentences[i].sentence)
    for i, item in enumerate(items)
)
store.freeze()

with resources.as_file(data / "questions_mini.json") as path:
    questions = load_questions(path, items, schema)
scripted = ScriptedLlmBackend.from_file(
    str(data / "scripted_responses.json")
)

thresholds = calibrate(store.vectors()).thresholds()
print("thresholds (mu-sigma, mu, mu+sigma):",
      " ".join(f"{t:.4f}" for t in thresholds), "\n")

report = run_suite(
    questions, store, schema, scripted, embedder,
    thresholds=list(thresholds), runs=5, model="scripted",
)
print(render_report(report, "table-text"))

print("per-question tiers (first run, middle threshold):")
middle = thresholds[1]
for entry in report.breakdown:
    if entry.run_index == 0 and entry.threshold == middle:
        print(f"  {entry.question_id:>3}  {entry.difficulty.value:<6} "
              f"tier={entry.tier:<8} f1={entry.f1:.3f}")
