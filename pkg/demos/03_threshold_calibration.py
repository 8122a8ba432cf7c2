"""Calibrating the semantic-similarity threshold.

Embeds the fixture corpus, measures the pairwise cosine-distance
distribution, and derives the three candidate thresholds (mu - sigma, mu,
mu + sigma) used by the fallback tiers.
"""

from importlib import resources

import numpy as np

from foodrag import DeterministicEmbeddingBackend, calibrate, ingest, serialize

corpus_file = resources.files("foodrag") / "data" / "fixture_corpus.jsonl"
with resources.as_file(corpus_file) as path:
    items = ingest(path)

backend = DeterministicEmbeddingBackend(dimension=64, seed=0)
sentences = [serialize(item).sentence for item in items]
vectors = backend.embed(sentences)
print(f"embedded {len(sentences)} sentences at dimension {backend.dimension}")

# -- exact mode: every pair (the corpus is small enough)
stats = calibrate(vectors)
print(f"pairs: {stats.pair_count}  mu: {stats.mu:.4f}  sigma: {stats.sigma:.4f}")
t1, t2, t3 = stats.thresholds()
print(f"candidate thresholds: t1={t1:.4f}  t2={t2:.4f}  t3={t3:.4f}")

# -- a seeded sample reproduces the same picture
sampled = calibrate(vectors, sample_pairs=50_000, seed=7, exact_limit=0)
print(f"sampled (50k pairs): mu: {sampled.mu:.4f}  sigma: {sampled.sigma:.4f}")

# -- crude text histogram of the distance distribution
unit = vectors / np.linalg.norm(vectors, axis=1)[:, None]
distances = np.concatenate([1.0 - unit[i] @ unit[i + 1 :].T for i in range(len(unit) - 1)])
counts, edges = np.histogram(distances, bins=16)
peak = counts.max()
print("\ndistance distribution:")
for count, lo, hi in zip(counts, edges, edges[1:]):
    bar = "#" * max(1, round(40 * count / peak)) if count else ""
    print(f"  {lo:.3f}-{hi:.3f} {bar}")
