import numpy as np
import pytest

from embeval.store import EmbeddingSet, SourceKind, l2_normalize


def random_set(
    rng: np.random.Generator,
    n: int,
    f: int,
    c: int,
    normalized: bool = True,
    source_kind: SourceKind = SourceKind.GENERATIVE,
) -> EmbeddingSet:
    """Random embedding set whose labels cover every class at least once."""
    assert n >= c
    vectors = rng.standard_normal((n, f)).astype(np.float32)
    labels = np.concatenate([np.arange(c), rng.integers(0, c, size=n - c)]).astype(np.int32)
    rng.shuffle(labels)
    es = EmbeddingSet(
        vectors=vectors,
        labels=labels,
        class_names=tuple(f"class {j}" for j in range(c)),
        normalized=False,
        source_kind=source_kind,
    )
    return l2_normalize(es) if normalized else es


def blob_sets(
    rng: np.random.Generator,
    c: int,
    f: int,
    shots: int,
    test_per_class: int,
    sigma: float = 0.05,
):
    """Well-separated Gaussian blobs around orthogonal unit means.

    Returns (external, test) sets, both L2-normalized, plus the raw means.
    Requires f >= c so the class means can be orthonormal basis vectors.
    """
    assert f >= c
    means = np.eye(c, f, dtype=np.float64)

    def sample(per_class: int, kind: SourceKind) -> EmbeddingSet:
        vectors = []
        labels = []
        for j in range(c):
            vectors.append(means[j] + sigma * rng.standard_normal((per_class, f)))
            labels.extend([j] * per_class)
        es = EmbeddingSet(
            vectors=np.concatenate(vectors).astype(np.float32),
            labels=np.asarray(labels, dtype=np.int32),
            class_names=tuple(f"blob {j}" for j in range(c)),
            normalized=False,
            source_kind=kind,
        )
        return l2_normalize(es)

    return sample(shots, SourceKind.GENERATIVE), sample(test_per_class, SourceKind.TEST), means


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
