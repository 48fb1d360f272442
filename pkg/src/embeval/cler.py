"""Training-free class-centered recognition (CLER) scoring.

A candidate external dataset is summarized by one prototype per class
(the re-normalized mean of its normalized embeddings); test embeddings
are classified to the highest-cosine prototype and scored against their
ground-truth labels. The zero-shot baseline swaps prototypes for per-class
text embeddings, and the ensemble averages the two score matrices before
the argmax.

All reductions run in fixed order in 64-bit accumulators (see num.py),
so scores are bit-reproducible regardless of thread count. Ties in every
argmax resolve to the lowest class index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVectorError,
    MissingClassError,
    ShapeError,
    ValidationError,
)
from .num import as_f64, inorder_dot, inorder_matmul, inorder_mean_rows, row_norms
from .store import EmbeddingSet, TextEmbeddings, require_normalized

CENTER_NORM_ATOL = 1e-6


@dataclass(frozen=True, eq=False)
class ClassCenters:
    """One unit-norm prototype vector per class plus per-class shot counts."""

    centers: np.ndarray
    shots_per_class: tuple[int, ...]

    def __post_init__(self):
        centers = np.ascontiguousarray(self.centers, dtype=np.float64)
        shots = tuple(int(s) for s in self.shots_per_class)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "shots_per_class", shots)
        if centers.ndim != 2 or centers.shape[0] != len(shots) or not shots:
            raise ValidationError(
                f"need one center per class: {centers.shape} vs {len(shots)} shot counts"
            )
        if any(s < 1 for s in shots):
            raise ValidationError("every class needs at least one shot")
        norms = row_norms(centers)
        bad = np.nonzero(np.abs(norms - 1.0) > CENTER_NORM_ATOL)[0]
        if bad.size:
            raise ValidationError(
                f"center {int(bad[0])} has norm {norms[bad[0]]:.9g}, "
                f"expected 1.0 within {CENTER_NORM_ATOL:g}"
            )
        centers.setflags(write=False)

    @property
    def c(self) -> int:
        return self.centers.shape[0]

    @property
    def f(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True, eq=False)
class PredictionVector:
    """Per-row class scores plus the argmax labels under the fixed tie rule."""

    predicted_labels: np.ndarray
    score_matrix: np.ndarray

    def __post_init__(self):
        scores = np.ascontiguousarray(self.score_matrix, dtype=np.float64)
        preds = np.ascontiguousarray(self.predicted_labels, dtype=np.int64)
        object.__setattr__(self, "score_matrix", scores)
        object.__setattr__(self, "predicted_labels", preds)
        if scores.ndim != 2:
            raise ShapeError(f"score_matrix must be N x C, got {scores.shape}")
        if preds.shape != (scores.shape[0],):
            raise ShapeError("predicted_labels length must match score_matrix rows")
        # np.argmax returns the first maximum, which is the documented tie rule
        if not np.array_equal(preds, np.argmax(scores, axis=1)):
            raise ValidationError("predicted_labels disagree with the argmax tie rule")
        scores.setflags(write=False)
        preds.setflags(write=False)

    @classmethod
    def from_scores(cls, score_matrix: np.ndarray) -> "PredictionVector":
        scores = np.ascontiguousarray(score_matrix, dtype=np.float64)
        return cls(predicted_labels=np.argmax(scores, axis=1), score_matrix=scores)

    @property
    def n(self) -> int:
        return self.score_matrix.shape[0]


def class_centers(external: EmbeddingSet) -> ClassCenters:
    """Mean each class's normalized embeddings, then re-normalize.

    Every class in the external set's label space must have at least one
    vector; unlabeled (-1) rows are rejected.
    """
    require_normalized(external, "external embeddings")
    labels = external.labels
    if labels.min() < 0:
        raise ValidationError("external set contains unlabeled (-1) rows")
    c, f = external.c, external.f
    centers = np.empty((c, f), dtype=np.float64)
    shots = []
    vectors = as_f64(external.vectors)
    for j in range(c):
        rows = vectors[labels == j]
        if rows.shape[0] == 0:
            raise MissingClassError(
                f"class {j} ({external.class_names[j]!r}) has no vectors"
            )
        mean = inorder_mean_rows(rows)
        norm = float(np.sqrt(inorder_dot(mean, mean)))
        if norm == 0.0:
            raise DegenerateVectorError(
                f"class {j} ({external.class_names[j]!r}) has a zero mean embedding"
            )
        centers[j] = mean / norm
        shots.append(rows.shape[0])
    return ClassCenters(centers=centers, shots_per_class=tuple(shots))


def _check_f(f_left: int, f_right: int) -> None:
    if f_left != f_right:
        raise ShapeError(f"embedding widths differ: {f_left} vs {f_right}")


def predict_centered(centers: ClassCenters, test: EmbeddingSet) -> PredictionVector:
    """Score test rows against prototypes; argmax with lowest-index ties."""
    _check_f(centers.f, test.f)
    require_normalized(test, "test embeddings")
    scores = inorder_matmul(test.vectors, centers.centers)
    return PredictionVector.from_scores(scores)


def _accuracy(preds: PredictionVector, test: EmbeddingSet) -> float:
    if test.labels.min() < 0:
        raise ValidationError("test set contains unlabeled (-1) rows")
    correct = int(np.count_nonzero(preds.predicted_labels == test.labels.astype(np.int64)))
    return correct / test.n


def cler_score(centers: ClassCenters, test: EmbeddingSet) -> float:
    """Fraction of test rows whose nearest prototype matches their label."""
    return _accuracy(predict_centered(centers, test), test)


def _check_names(text: TextEmbeddings, test: EmbeddingSet) -> None:
    if text.class_names != test.class_names:
        raise ValidationError(
            f"class names differ: text={list(text.class_names)!r} "
            f"vs test={list(test.class_names)!r}"
        )


def zero_shot_score(text: TextEmbeddings, test: EmbeddingSet) -> float:
    """Accuracy of classifying test rows against per-class text embeddings."""
    _check_names(text, test)
    _check_f(text.f, test.f)
    require_normalized(test, "test embeddings")
    scores = inorder_matmul(test.vectors, text.vectors)
    return _accuracy(PredictionVector.from_scores(scores), test)


def cler_ensemble(centers: ClassCenters, text: TextEmbeddings, test: EmbeddingSet) -> float:
    """Accuracy of the averaged prototype + text score matrix."""
    _check_names(text, test)
    _check_f(centers.f, test.f)
    _check_f(text.f, test.f)
    if centers.c != text.c:
        raise ShapeError(f"center count {centers.c} != text class count {text.c}")
    require_normalized(test, "test embeddings")
    scores = (
        inorder_matmul(test.vectors, centers.centers)
        + inorder_matmul(test.vectors, text.vectors)
    ) / 2.0
    return _accuracy(PredictionVector.from_scores(scores), test)


def cler_delta(score: float, baseline: float) -> float:
    """Signed improvement of a score over a baseline, both in [0, 1]."""
    for name, value in (("score", score), ("baseline", baseline)):
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")
    return score - baseline
