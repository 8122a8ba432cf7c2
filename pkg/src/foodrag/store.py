"""In-memory vector store: metadata filtering plus thresholded semantic search.

The two-stage query shape: a strict filter query returns exactly the
metadata match set and never touches vectors; a semantic query restricts to
a prefilter subset, then returns entries within a cosine-distance threshold
of the query vector, nearest first. Exact linear scan throughout —
correctness over speed at corpus scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .embeddings import DimensionMismatch, ZeroNormError
from .filters import MATCH_ALL, FilterExpr, MatchAll, evaluate

DEFAULT_QUERY_LIMIT = 10_000


class Tier(Enum):
    STRICT = "Strict"
    LOOSE = "Loose"
    SEMANTIC = "Semantic"


@dataclass(frozen=True)
class StoreEntry:
    item_id: str
    metadata: Mapping[str, object]
    vector: np.ndarray
    sentence: str


@dataclass(frozen=True)
class RetrievalResult:
    """Retrieved items with the filter, tier and threshold that produced them.

    Distances are None on the Strict tier (no vectors involved); on
    semantic tiers every reported distance is <= threshold_used and the
    list is ascending by (distance, item_id).
    """

    items: tuple[tuple[str, float | None], ...]
    tier: Tier
    filter_used: FilterExpr
    threshold_used: float | None
    truncated: bool

    def item_ids(self) -> list[str]:
        return [item_id for item_id, _ in self.items]

    def id_set(self) -> frozenset[str]:
        return frozenset(item_id for item_id, _ in self.items)


class StoreFrozenError(RuntimeError):
    pass


class VectorStore:
    """Entries keyed by item id, one vector each, fixed dimension.

    Upserts are a builder phase; freeze() makes the store immutable, after
    which concurrent reads are safe. Queries work either way.
    """

    def __init__(self, dimension: int | None = None, default_limit: int = DEFAULT_QUERY_LIMIT):
        self._dimension = dimension
        self._default_limit = default_limit
        self._entries: dict[str, StoreEntry] = {}
        self._frozen = False
        self._cache: tuple[list[str], np.ndarray] | None = None

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def dimension(self) -> int | None:
        return self._dimension

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def default_limit(self) -> int:
        return self._default_limit

    def ids(self) -> list[str]:
        return sorted(self._entries)

    def get(self, item_id: str) -> StoreEntry | None:
        return self._entries.get(item_id)

    def entries(self) -> list[StoreEntry]:
        return [self._entries[item_id] for item_id in self.ids()]

    def vectors(self) -> np.ndarray:
        """Raw vectors as rows, aligned with ids() order."""
        if not self._entries:
            return np.zeros((0, self._dimension or 0))
        return np.stack([self._entries[i].vector for i in self.ids()])

    def upsert(self, entries: Iterable[StoreEntry]) -> int:
        """Add or replace entries; returns the store size afterwards."""
        if self._frozen:
            raise StoreFrozenError("store is frozen; re-ingest to change it")
        for entry in entries:
            vector = np.asarray(entry.vector, dtype=np.float64)
            if vector.ndim != 1:
                raise DimensionMismatch("entry vectors must be 1-D")
            if self._dimension is None:
                self._dimension = int(vector.shape[0])
            elif vector.shape[0] != self._dimension:
                raise DimensionMismatch(
                    f"entry {entry.item_id!r} has dimension {vector.shape[0]},"
                    f" store is {self._dimension}"
                )
            self._entries[entry.item_id] = StoreEntry(
                item_id=entry.item_id,
                metadata=dict(entry.metadata),
                vector=vector,
                sentence=entry.sentence,
            )
        self._cache = None
        return len(self._entries)

    def freeze(self) -> "VectorStore":
        self._frozen = True
        self._normalized()
        return self

    def _normalized(self) -> tuple[list[str], np.ndarray]:
        """ids in sorted order plus the matching unit-norm vector matrix."""
        if self._cache is None:
            ids = self.ids()
            if ids:
                matrix = np.stack([self._entries[i].vector for i in ids])
                norms = np.linalg.norm(matrix, axis=1)
                if np.any(norms == 0.0):
                    raise ZeroNormError("store contains a zero-norm vector")
                matrix = matrix / norms[:, None]
            else:
                matrix = np.zeros((0, self._dimension or 0))
            self._cache = (ids, matrix)
        return self._cache

    def query_filtered(self, flt: FilterExpr, limit: int | None = None) -> RetrievalResult:
        """Exactly the entries whose metadata satisfies the filter.

        No distances are computed and no threshold applies: when metadata
        filtering succeeds the result set is defined by the filter alone,
        regardless of any ranking. `truncated` flags results cut by limit.
        """
        limit = self._default_limit if limit is None else limit
        matched = [
            item_id
            for item_id in self.ids()
            if evaluate(flt, self._entries[item_id].metadata)
        ]
        truncated = len(matched) > limit
        items = tuple((item_id, None) for item_id in matched[:limit])
        return RetrievalResult(
            items=items,
            tier=Tier.STRICT,
            filter_used=flt,
            threshold_used=None,
            truncated=truncated,
        )

    def query_semantic(
        self,
        query_vector: Sequence[float] | np.ndarray,
        prefilter: FilterExpr = MATCH_ALL,
        threshold: float = 1.0,
        limit: int | None = None,
    ) -> RetrievalResult:
        """Thresholded similarity search within the prefilter subset.

        Returns entries at cosine distance <= threshold from the query,
        ascending by distance with ties broken by item id. Tier is Semantic
        for a MatchAll prefilter (pure semantic search) and Loose otherwise.
        """
        if not 0.0 < threshold <= 2.0:
            raise ValueError(f"threshold must be in (0, 2], got {threshold}")
        limit = self._default_limit if limit is None else limit
        query = np.asarray(query_vector, dtype=np.float64)
        if self._dimension is not None and query.shape != (self._dimension,):
            raise DimensionMismatch(
                f"query vector has shape {query.shape}, store dimension is {self._dimension}"
            )
        norm = np.linalg.norm(query)
        if norm == 0.0:
            raise ZeroNormError("query vector has zero norm")

        ids, unit = self._normalized()
        candidates = [
            i for i, item_id in enumerate(ids)
            if evaluate(prefilter, self._entries[item_id].metadata)
        ]
        tier = Tier.SEMANTIC if isinstance(prefilter, MatchAll) else Tier.LOOSE
        if not candidates:
            return RetrievalResult((), tier, prefilter, threshold, False)

        distances = 1.0 - unit[candidates] @ (query / norm)
        distances = np.maximum(distances, 0.0)  # clamp float noise below zero
        within = [
            (float(distances[k]), ids[idx])
            for k, idx in enumerate(candidates)
            if distances[k] <= threshold
        ]
        within.sort()
        truncated = len(within) > limit
        items = tuple((item_id, dist) for dist, item_id in within[:limit])
        return RetrievalResult(
            items=items,
            tier=tier,
            filter_used=prefilter,
            threshold_used=threshold,
            truncated=truncated,
        )

    def save_snapshot(self, path: Union[str, Path]) -> None:
        """One JSON line per entry; reloadable without re-embedding."""
        with open(path, "w", encoding="utf-8") as handle:
            for entry in self.entries():
                handle.write(
                    json.dumps(
                        {
                            "id": entry.item_id,
                            "metadata": dict(entry.metadata),
                            "sentence": entry.sentence,
                            "vector": entry.vector.tolist(),
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    @classmethod
    def load_snapshot(
        cls, path: Union[str, Path], default_limit: int = DEFAULT_QUERY_LIMIT
    ) -> "VectorStore":
        store = cls(default_limit=default_limit)
        entries = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                entries.append(
                    StoreEntry(
                        item_id=record["id"],
                        metadata=record["metadata"],
                        vector=np.asarray(record["vector"], dtype=np.float64),
                        sentence=record["sentence"],
                    )
                )
        store.upsert(entries)
        return store
