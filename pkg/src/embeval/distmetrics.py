"""Comparator metrics: Fréchet distance between embedding Gaussians, CLIP score.

The Fréchet distance uses the symmetric-product eigendecomposition for the
matrix square root: sqrt of C_a C_b is obtained from eigh(S C_b S) with
S = sqrt(C_a), which is deterministic and accurate at the matrix sizes this
toolkit targets. Eigenvalues in [-1e-6, 0) are clamped to zero; anything
more negative raises NumericalError.

The CLIP score is the mean cosine similarity between each image embedding
and the text embedding of its own class.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientDataError,
    NumericalError,
    ShapeError,
    ValidationError,
)
from .num import as_f64, inorder_rowwise_dot, inorder_sum
from .store import EmbeddingSet, TextEmbeddings, require_normalized

EIG_CLAMP = 1e-6
SYM_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class GaussianStats:
    """Sample mean and unbiased covariance of one embedding distribution."""

    mean: np.ndarray
    covariance: np.ndarray
    count: int

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        cov = np.ascontiguousarray(self.covariance, dtype=np.float64)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "count", int(self.count))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ShapeError(f"mean {mean.shape} and covariance {cov.shape} disagree")
        if self.count < 2:
            raise InsufficientDataError("need at least 2 samples for a covariance")
        if float(np.abs(cov - cov.T).max()) > SYM_ATOL:
            raise ValidationError("covariance must be symmetric within 1e-9")
        mean.setflags(write=False)
        cov.setflags(write=False)

    @property
    def f(self) -> int:
        return self.mean.size


def gaussian_stats(es: EmbeddingSet) -> GaussianStats:
    """Sample mean and unbiased (N-1) covariance, symmetrized."""
    if es.n < 2:
        raise InsufficientDataError(f"need N >= 2 embeddings, got {es.n}")
    x = as_f64(es.vectors)
    mean = np.einsum("nf->f", x) / es.n
    centered = x - mean
    cov = np.einsum("ni,nj->ij", centered, centered) / (es.n - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean=mean, covariance=cov, count=es.n)


def _psd_eig(matrix: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition with small negative eigenvalues clamped to zero."""
    values, vectors = np.linalg.eigh(matrix)
    if float(values.min()) < -EIG_CLAMP:
        raise NumericalError(
            f"{what} is not PSD: smallest eigenvalue {float(values.min()):.3e}"
        )
    return np.clip(values, 0.0, None), vectors


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """||mu_a - mu_b||^2 + Tr(C_a + C_b - 2 (C_a C_b)^{1/2})."""
    if a.f != b.f:
        raise ShapeError(f"dimension mismatch: {a.f} vs {b.f}")
    values_a, vectors_a = _psd_eig(a.covariance, "first covariance")
    sqrt_a = (vectors_a * np.sqrt(values_a)) @ vectors_a.T
    inner = sqrt_a @ b.covariance @ sqrt_a
    inner = (inner + inner.T) / 2.0
    values_m, _ = _psd_eig(inner, "covariance product")
    trace_sqrt = float(np.sqrt(values_m).sum())

    diff = a.mean - b.mean
    value = (
        float(np.einsum("f,f->", diff, diff))
        + float(np.trace(a.covariance))
        + float(np.trace(b.covariance))
        - 2.0 * trace_sqrt
    )
    if value < -1e-9:
        raise NumericalError(f"Fréchet distance came out negative: {value:.3e}")
    return max(value, 0.0)


def clip_score(images: EmbeddingSet, text: TextEmbeddings) -> float:
    """Mean cosine between each image and the text embedding of its label."""
    if images.class_names != text.class_names:
        raise ValidationError(
            f"class names differ: images={list(images.class_names)!r} "
            f"vs text={list(text.class_names)!r}"
        )
    if images.f != text.f:
        raise ShapeError(f"embedding widths differ: {images.f} vs {text.f}")
    require_normalized(images, "image embeddings")
    if images.labels.min() < 0:
        raise ValidationError("image set contains unlabeled (-1) rows")
    matched = as_f64(text.vectors)[images.labels.astype(np.int64)]
    sims = inorder_rowwise_dot(images.vectors, matched)
    value = inorder_sum(sims) / images.n
    return float(min(1.0, max(-1.0, value)))
