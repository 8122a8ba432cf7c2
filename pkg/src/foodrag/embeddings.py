"""Embedding backends, cosine distance, and similarity-threshold calibration.

Two interchangeable backends: a remote HTTP embedding API and a
deterministic local backend (seeded hash-derived unit vectors) so the whole
pipeline runs offline. Calibration measures the corpus pairwise
cosine-distance distribution and exposes the (mu - sigma, mu, mu + sigma)
threshold candidates.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .transport import BackendUnavailable, auth_headers, post_json


class DimensionMismatch(ValueError):
    pass


class ZeroNormError(ValueError):
    pass


class TooFewVectors(ValueError):
    pass


DEFAULT_EXACT_LIMIT = 5_000
DEFAULT_SAMPLE_PAIRS = 1_000_000


class DeterministicEmbeddingBackend:
    """Seeded, hash-derived unit vectors: an offline embedder stand-in.

    Identical text always maps to the identical vector; different seeds
    give unrelated embedding spaces. No semantic structure is promised —
    only determinism, unit norm, and a fixed dimension.
    """

    kind = "deterministic"

    def __init__(self, dimension: int = 64, seed: int = 0):
        if dimension < 2:
            raise ValueError("dimension must be >= 2")
        self.dimension = dimension
        self.seed = seed

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            digest = hashlib.blake2b(
                f"{self.seed}\x1f{text}".encode("utf-8"), digest_size=8
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            vec = rng.standard_normal(self.dimension)
            norm = np.linalg.norm(vec)
            if norm < 1e-12:  # astronomically unlikely; keep the invariant anyway
                vec[0] = 1.0
                norm = 1.0
            out[i] = vec / norm
        return out


class RemoteEmbeddingBackend:
    """HTTP embedding API client.

    Request:  POST {endpoint} {"model": .., "input": [texts], "dimension": ..}
    Response: {"embeddings": [[...], ...]} with one row per input text.
    Auth token read from the named environment variable at call time.
    """

    kind = "remote"

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int = 3072,
        auth_env: str = "EMBED_API_TOKEN",
        timeout: float = 30.0,
        max_retries: int = 2,
    ):
        self.endpoint = endpoint
        self.model = model
        self.dimension = dimension
        self.auth_env = auth_env
        self.timeout = timeout
        self.max_retries = max_retries

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension), dtype=np.float64)
        data = post_json(
            self.endpoint,
            {"model": self.model, "input": list(texts), "dimension": self.dimension},
            headers=auth_headers(self.auth_env),
            timeout=self.timeout,
            max_retries=self.max_retries,
        )
        rows = data.get("embeddings")
        if not isinstance(rows, list) or len(rows) != len(texts):
            raise BackendUnavailable(
                f"{self.endpoint}: expected {len(texts)} embeddings in response"
            )
        matrix = np.asarray(rows, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.dimension:
            raise DimensionMismatch(
                f"backend returned dimension {matrix.shape[-1] if matrix.ndim == 2 else '?'},"
                f" configured {self.dimension}"
            )
        return matrix


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """d(a, b) = 1 - (a . b) / (|a| |b|), in [0, 2]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dimensions differ: {a.shape} vs {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroNormError("cosine distance is undefined for zero-norm vectors")
    return float(1.0 - float(a @ b) / (norm_a * norm_b))


@dataclass(frozen=True)
class DistanceStats:
    """Mean/std of the corpus pairwise cosine-distance distribution."""

    mu: float
    sigma: float
    pair_count: int
    sampled: bool
    seed: int | None = None

    def thresholds(self) -> tuple[float, float, float]:
        """The three candidate similarity thresholds: mu-sigma, mu, mu+sigma."""
        return (self.mu - self.sigma, self.mu, self.mu + self.sigma)

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma": self.sigma,
            "thresholds": list(self.thresholds()),
            "pair_count": self.pair_count,
            "sampled": self.sampled,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DistanceStats":
        return cls(
            mu=data["mu"],
            sigma=data["sigma"],
            pair_count=data["pair_count"],
            sampled=data["sampled"],
            seed=data.get("seed"),
        )


def _normalized_rows(vectors) -> np.ndarray:
    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-D array of row vectors")
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        raise ZeroNormError("calibration set contains a zero-norm vector")
    return matrix / norms[:, None]


def calibrate(
    vectors,
    *,
    sample_pairs: int | None = None,
    seed: int = 0,
    exact_limit: int = DEFAULT_EXACT_LIMIT,
) -> DistanceStats:
    """Distance distribution over vector pairs.

    With n <= exact_limit all C(n, 2) pairs are enumerated; above it,
    `sample_pairs` (default 1e6) unordered distinct-index pairs are drawn
    uniformly (with replacement) from a seeded generator, so results are
    bit-reproducible for a fixed seed. Sigma is the population standard
    deviation.
    """
    unit = _normalized_rows(vectors)
    n = unit.shape[0]
    if n < 2:
        raise TooFewVectors("calibration requires at least 2 vectors")

    if n <= exact_limit:
        chunks = [1.0 - unit[i] @ unit[i + 1 :].T for i in range(n - 1)]
        distances = np.concatenate(chunks)
        return DistanceStats(
            mu=float(np.mean(distances)),
            sigma=float(np.std(distances)),
            pair_count=n * (n - 1) // 2,
            sampled=False,
        )

    count = sample_pairs if sample_pairs is not None else DEFAULT_SAMPLE_PAIRS
    rng = np.random.default_rng(seed)
    left = np.empty(count, dtype=np.int64)
    right = np.empty(count, dtype=np.int64)
    filled = 0
    # The pair list is fully drawn before any distance computation, so the
    # sample is a pure function of (seed, n, count).
    while filled < count:
        need = count - filled
        i = rng.integers(0, n, size=need)
        j = rng.integers(0, n, size=need)
        keep = i != j
        kept = int(np.count_nonzero(keep))
        left[filled : filled + kept] = i[keep]
        right[filled : filled + kept] = j[keep]
        filled += kept
    distances = 1.0 - np.einsum("ij,ij->i", unit[left], unit[right])
    return DistanceStats(
        mu=float(np.mean(distances)),
        sigma=float(np.std(distances)),
        pair_count=count,
        sampled=True,
        seed=seed,
    )
