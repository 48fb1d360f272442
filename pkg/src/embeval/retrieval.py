"""Exact cosine k-NN over a local text-embedding corpus.

The corpus stands in for a web-scale index: rows are unit-norm text
embeddings with unique string ids and the -1 unlabeled sentinel. Search
is an exact full scan (no approximation), so mean-text-similarity values
are deterministic. Hits sort by similarity descending with ties broken by
id ascending; similarities are clamped to [-1, 1] on output.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InsufficientHitsError,
    IoError,
    ValidationError,
)
from .num import inorder_dot, inorder_matvec, row_norms
from .store import EmbeddingSet, NORM_ATOL, load_embedding_set, require_normalized


@dataclass(frozen=True, eq=False)
class RetrievalIndex:
    """Immutable searchable corpus: unit-norm rows plus per-row string ids."""

    corpus: EmbeddingSet
    ids: tuple[str, ...]

    def __post_init__(self):
        ids = tuple(self.ids)
        object.__setattr__(self, "ids", ids)
        if len(ids) != self.corpus.n:
            raise ValidationError(f"{len(ids)} ids for {self.corpus.n} corpus rows")
        if len(set(ids)) != len(ids):
            raise ValidationError("corpus ids must be unique")
        if np.any(self.corpus.labels != -1):
            raise ValidationError("corpus rows must carry the -1 unlabeled sentinel")
        norms = row_norms(self.corpus.vectors)
        bad = np.nonzero(np.abs(norms - 1.0) > NORM_ATOL)[0]
        if bad.size:
            raise ValidationError(
                f"corpus row {int(bad[0])} has norm {norms[bad[0]]:.6g}, expected 1.0"
            )

    @property
    def size(self) -> int:
        return self.corpus.n


@dataclass(frozen=True)
class RetrievalHit:
    id: str
    similarity: float
    rank: int


def load_retrieval_index(gbe_path: str | Path, ids_path: str | Path) -> RetrievalIndex:
    """Corpus from a `.gbe` file plus a sidecar id list, one id per line."""
    corpus = load_embedding_set(gbe_path)
    try:
        lines = Path(ids_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {ids_path}: {exc}") from exc
    return RetrievalIndex(corpus=corpus, ids=tuple(lines))


def _check_query(query: np.ndarray, f: int) -> np.ndarray:
    query = np.ascontiguousarray(query, dtype=np.float64)
    if query.shape != (f,):
        raise ValidationError(f"query must be a length-{f} vector, got shape {query.shape}")
    norm = float(np.sqrt(inorder_dot(query, query)))
    if abs(norm - 1.0) > NORM_ATOL:
        raise ValidationError(f"query must be unit-norm, got norm {norm:.6g}")
    return query


def _similarities(index: RetrievalIndex, query: np.ndarray) -> np.ndarray:
    sims = inorder_matvec(index.corpus.vectors, _check_query(query, index.corpus.f))
    return np.clip(sims, -1.0, 1.0)


def topk(index: RetrievalIndex, query, k: int) -> list[RetrievalHit]:
    """Exact k nearest corpus rows by cosine similarity."""
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if k > index.size:
        raise ValidationError(f"k={k} exceeds corpus size {index.size}")
    sims = _similarities(index, query)
    order = np.argsort(-sims, kind="stable")
    # reorder each equal-similarity run by id ascending
    hits: list[RetrievalHit] = []
    i = 0
    while i < order.size and len(hits) < k:
        j = i
        while j < order.size and sims[order[j]] == sims[order[i]]:
            j += 1
        run = sorted(order[i:j], key=lambda idx: index.ids[idx])
        for idx in run:
            if len(hits) == k:
                break
            hits.append(
                RetrievalHit(id=index.ids[idx], similarity=float(sims[idx]), rank=len(hits) + 1)
            )
        i = j
    return hits


def category_mts(index: RetrievalIndex, query, k: int) -> float:
    """Mean similarity of the top-k hits for one category query."""
    hits = topk(index, query, k)
    value = sum(h.similarity for h in hits) / k
    return min(1.0, max(-1.0, value))


def dataset_mts(per_category: list[float]) -> float:
    """Unweighted mean of per-category mean text similarities."""
    if not per_category:
        raise ValidationError("need at least one category MTS value")
    return sum(float(v) for v in per_category) / len(per_category)


def select_retrieval_shots(hits: list[RetrievalHit], n: int) -> list[str]:
    """Ids of the n highest-similarity hits, in rank order."""
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    if n > len(hits):
        raise InsufficientHitsError(f"need {n} hits but only {len(hits)} available")
    return [h.id for h in sorted(hits, key=lambda h: h.rank)[:n]]


def filter_by_similarity(candidates: EmbeddingSet, query, threshold: float) -> list[int]:
    """Indices of candidate rows whose cosine to the query is >= threshold."""
    require_normalized(candidates, "candidate embeddings")
    sims = inorder_matvec(candidates.vectors, _check_query(query, candidates.f))
    sims = np.clip(sims, -1.0, 1.0)
    return [int(i) for i in np.nonzero(sims >= threshold)[0]]
