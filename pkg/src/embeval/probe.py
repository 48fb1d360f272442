"""L2-regularized multinomial logistic-regression probe on frozen embeddings.

The probe is the ground-truth signal the training-free scores are judged
against. Training is deterministic full-batch gradient descent with
Armijo backtracking (c=1e-4, shrink 0.5) from zero initialization; the
objective is mean softmax cross-entropy plus (lambda/2)*||W||_F^2 with
unregularized biases. Identical inputs produce bit-identical models.

evaluate_metric covers the four benchmark metric kinds: plain accuracy,
mean per-class recall, two-class ROC AUC (ties count 1/2), and 11-point
interpolated mean average precision computed one-vs-rest on the score
matrix columns.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cler import PredictionVector
from .errors import (
    FormatError,
    IoError,
    MetricWarning,
    MissingClassError,
    NumericalError,
    ShapeError,
    ValidationError,
)
from .num import as_f64
from .store import (
    EmbeddingSet,
    MetricKind,
    SourceKind,
    decode_embedding_set,
    require_normalized,
    save_embedding_set,
)

ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
MIN_STEP = 1e-20

DEFAULT_LAMBDA = 1e-4
DEFAULT_MAX_ITER = 500
DEFAULT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ProbeModel:
    """Linear classifier W x + b with its regularizer and training trace."""

    weights: np.ndarray
    biases: np.ndarray
    regularization: float
    training_trace: tuple[tuple[int, float], ...]

    def __post_init__(self):
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        biases = np.ascontiguousarray(self.biases, dtype=np.float64)
        trace = tuple((int(i), float(v)) for i, v in self.training_trace)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)
        object.__setattr__(self, "training_trace", trace)
        if weights.ndim != 2 or biases.shape != (weights.shape[0],):
            raise ShapeError(
                f"weights must be C x F with C biases, got {weights.shape} / {biases.shape}"
            )
        if not (np.isfinite(weights).all() and np.isfinite(biases).all()):
            raise ValidationError("probe parameters must be finite")
        if self.regularization < 0:
            raise ValidationError("regularization must be nonnegative")
        for (_, prev), (_, curr) in zip(trace, trace[1:]):
            if curr > prev:
                raise ValidationError("training trace must be non-increasing")
        weights.setflags(write=False)
        biases.setflags(write=False)

    @property
    def c(self) -> int:
        return self.weights.shape[0]

    @property
    def f(self) -> int:
        return self.weights.shape[1]


def _logits(weights, biases, x) -> np.ndarray:
    return np.einsum("nf,cf->nc", x, weights) + biases


def probe_objective(weights, biases, x, y, lam: float) -> float:
    """Mean cross-entropy plus (lam/2)*||W||_F^2; the training objective."""
    logits = _logits(weights, biases, x)
    m = logits.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(logits - m).sum(axis=1))
    ce = float(np.einsum("n->", lse - logits[np.arange(x.shape[0]), y])) / x.shape[0]
    return ce + 0.5 * lam * float(np.einsum("cf,cf->", weights, weights))


def probe_gradients(weights, biases, x, y, lam: float):
    """Analytic gradients of probe_objective w.r.t. W and b."""
    logits = _logits(weights, biases, x)
    m = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - m)
    probs = e / e.sum(axis=1, keepdims=True)
    delta = probs
    delta[np.arange(x.shape[0]), y] -= 1.0
    delta /= x.shape[0]
    grad_w = np.einsum("nc,nf->cf", delta, x) + lam * weights
    grad_b = np.einsum("nc->c", delta)
    return grad_w, grad_b


def train_linear_probe(
    train: EmbeddingSet,
    lam: float = DEFAULT_LAMBDA,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> ProbeModel:
    """Fit the probe by monotone gradient descent with backtracking.

    Stops when the gradient infinity-norm drops below tol or after
    max_iter accepted steps; the trace records the initial loss and the
    loss after every accepted step.
    """
    require_normalized(train, "probe training embeddings")
    if lam < 0:
        raise ValidationError("lam must be nonnegative")
    if max_iter < 1:
        raise ValidationError("max_iter must be positive")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    labels = train.labels
    if labels.min() < 0:
        raise ValidationError("training set contains unlabeled (-1) rows")
    present = np.bincount(labels, minlength=train.c)
    missing = np.nonzero(present == 0)[0]
    if missing.size:
        j = int(missing[0])
        raise MissingClassError(f"class {j} ({train.class_names[j]!r}) absent from training set")

    x = as_f64(train.vectors)
    y = labels.astype(np.int64)
    weights = np.zeros((train.c, train.f), dtype=np.float64)
    biases = np.zeros(train.c, dtype=np.float64)

    loss = probe_objective(weights, biases, x, y, lam)
    if not np.isfinite(loss):
        raise NumericalError(f"initial loss is not finite: {loss!r}")
    trace = [(0, loss)]

    for iteration in range(1, max_iter + 1):
        grad_w, grad_b = probe_gradients(weights, biases, x, y, lam)
        grad_inf = max(float(np.abs(grad_w).max()), float(np.abs(grad_b).max()))
        if grad_inf < tol:
            break
        grad_sq = float(np.einsum("cf,cf->", grad_w, grad_w)) + float(
            np.einsum("c,c->", grad_b, grad_b)
        )
        step = 1.0
        while True:
            cand_w = weights - step * grad_w
            cand_b = biases - step * grad_b
            cand_loss = probe_objective(cand_w, cand_b, x, y, lam)
            if np.isfinite(cand_loss) and cand_loss <= loss - ARMIJO_C * step * grad_sq:
                break
            step *= ARMIJO_SHRINK
            if step < MIN_STEP:
                raise NumericalError(
                    f"line search failed at iteration {iteration} (loss {loss!r})"
                )
        weights, biases, loss = cand_w, cand_b, cand_loss
        trace.append((iteration, loss))

    if not np.isfinite(loss):
        raise NumericalError(f"training diverged: loss {loss!r}")
    return ProbeModel(
        weights=weights,
        biases=biases,
        regularization=float(lam),
        training_trace=tuple(trace),
    )


def probe_scores(model: ProbeModel, test: EmbeddingSet) -> PredictionVector:
    """Score matrix test . W^T + b with the global argmax tie rule."""
    if model.f != test.f:
        raise ShapeError(f"model width {model.f} != test width {test.f}")
    scores = _logits(model.weights, model.biases, as_f64(test.vectors))
    return PredictionVector.from_scores(scores)


def _rank_with_ties(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, ties assigned the average rank."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    i = 0
    while i < scores.size:
        j = i
        while j < scores.size and scores[order[j]] == scores[order[i]]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + 1 + j)
        i = j
    return ranks


def _roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = scores.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("roc_auc needs at least one positive and one negative")
    ranks = _rank_with_ties(scores)
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _average_precision_11pt(scores: np.ndarray, positive: np.ndarray) -> float:
    n = scores.size
    # descending score, ties by ascending index, for a deterministic ranking
    order = np.lexsort((np.arange(n), -scores))
    hits = positive[order]
    tp = np.cumsum(hits)
    total = int(positive.sum())
    precision = tp / np.arange(1, n + 1)
    recall = tp / total
    ap = 0.0
    for threshold in np.linspace(0.0, 1.0, 11):
        mask = recall >= threshold - 1e-12
        ap += float(precision[mask].max()) if mask.any() else 0.0
    return ap / 11.0


def evaluate_metric(preds: PredictionVector, labels, kind: MetricKind) -> float:
    """Evaluate predictions against labels under one of the benchmark metrics."""
    kind = MetricKind(kind)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if labels.shape != (preds.n,):
        raise ShapeError(f"labels shape {labels.shape} != ({preds.n},)")
    c = preds.score_matrix.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise ValidationError(f"labels must lie in [0, {c})")

    if kind == MetricKind.ACCURACY:
        return float(np.count_nonzero(preds.predicted_labels == labels)) / preds.n

    if kind == MetricKind.MEAN_PER_CLASS:
        recalls = []
        for j in range(c):
            support = labels == j
            if not support.any():
                warnings.warn(f"class {j} has no test instances; skipped", MetricWarning)
                continue
            recalls.append(
                float(np.count_nonzero(preds.predicted_labels[support] == j))
                / int(support.sum())
            )
        if not recalls:
            raise ValidationError("no class has any test instance")
        return sum(recalls) / len(recalls)

    if kind == MetricKind.ROC_AUC:
        if c != 2:
            raise ValidationError(f"roc_auc requires exactly 2 classes, got {c}")
        return _roc_auc(preds.score_matrix[:, 1], labels)

    # map_11pt, one-vs-rest over score matrix columns
    aps = []
    for j in range(c):
        positive = labels == j
        if not positive.any():
            warnings.warn(f"class {j} has no test instances; skipped", MetricWarning)
            continue
        aps.append(_average_precision_11pt(preds.score_matrix[:, j], positive))
    if not aps:
        raise ValidationError("no class has any test instance")
    return sum(aps) / len(aps)


def save_probe_model(
    model: ProbeModel, class_names, path,
) -> None:
    """Persist a probe in the `.gbe` container (weights as rows, labels 0..C-1)."""
    carrier = EmbeddingSet(
        vectors=model.weights.astype(np.float32),
        labels=np.arange(model.c, dtype=np.int32),
        class_names=tuple(class_names),
        normalized=False,
        source_kind=SourceKind.TEXT,
    )
    extra = {
        "model": "probe",
        "lambda": model.regularization,
        "biases": [float(b) for b in model.biases],
        "trace": [[i, v] for i, v in model.training_trace],
    }
    save_embedding_set(carrier, path, extra_header=extra)


def load_probe_model(path) -> tuple[ProbeModel, tuple[str, ...]]:
    """Inverse of save_probe_model; float32 weight precision is what was stored."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    carrier, header = decode_embedding_set(data)
    if header.get("model") != "probe":
        raise FormatError(f"{path} is not a probe container")
    model = ProbeModel(
        weights=carrier.vectors.astype(np.float64),
        biases=np.asarray(header["biases"], dtype=np.float64),
        regularization=float(header["lambda"]),
        training_trace=tuple((int(i), float(v)) for i, v in header.get("trace", [])),
    )
    return model, carrier.class_names


__all__ = [
    "ProbeModel",
    "train_linear_probe",
    "probe_objective",
    "probe_gradients",
    "probe_scores",
    "evaluate_metric",
    "save_probe_model",
    "load_probe_model",
]
