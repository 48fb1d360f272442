"""Embedding interchange format (`.gbe`), dataset manifests, validation.

`.gbe` byte layout (little-endian throughout):

    bytes 0..4   magic "GBE1"
    bytes 4..8   u32 header length H
    bytes 8..8+H UTF-8 JSON header, keys sorted, compact separators:
                 {"c": C, "class_names": [...], "dtype": "f32", "f": F,
                  "n": N, "normalized": bool, "source_kind": str,
                  "version": 1}
                 (writers may add extra keys; readers ignore unknown ones)
    then         N  i32 labels
    then         N*F f32 vectors, row-major

Saving the same set twice yields identical bytes; load(save(s)) == s
bit-exactly. Labels are i32 so the -1 "unlabeled" sentinel used by
retrieval corpora fits; every non-sentinel label must be in [0, C).

Loaded sets are immutable: their arrays are marked read-only and may be
shared across threads.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateVectorError,
    FormatError,
    IoError,
    ValidationError,
)
from .num import row_norms

MAGIC = b"GBE1"
NORM_ATOL = 1e-4


class SourceKind(str, Enum):
    GENERATIVE = "generative"
    RETRIEVAL = "retrieval"
    ORIGINAL = "original"
    TEST = "test"
    TEXT = "text"


class ConceptGroup(str, Enum):
    COMMON = "common"
    FINE_GRAINED = "fine_grained"
    RARE = "rare"


class MetricKind(str, Enum):
    ACCURACY = "accuracy"
    MEAN_PER_CLASS = "mean_per_class"
    ROC_AUC = "roc_auc"
    MAP_11PT = "map_11pt"


def _check_unit_rows(vectors: np.ndarray, atol: float, what: str) -> None:
    norms = row_norms(vectors)
    bad = np.nonzero(np.abs(norms - 1.0) > atol)[0]
    if bad.size:
        raise ValidationError(
            f"{what}: row {int(bad[0])} has L2 norm {norms[bad[0]]:.6g}, "
            f"expected 1.0 within {atol:g}"
        )


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """N labeled F-dimensional float32 vectors from one data source."""

    vectors: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    normalized: bool
    source_kind: SourceKind

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        names = tuple(self.class_names)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "source_kind", SourceKind(self.source_kind))

        if vectors.ndim != 2 or vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise ValidationError(f"vectors must be N x F with N,F >= 1, got shape {vectors.shape}")
        if labels.shape != (vectors.shape[0],):
            raise ValidationError(
                f"labels must have shape ({vectors.shape[0]},), got {labels.shape}"
            )
        if not names:
            raise ValidationError("class_names must be non-empty")
        if len(set(names)) != len(names):
            raise ValidationError("class_names must be unique")
        if any((not isinstance(c, str)) or c == "" for c in names):
            raise ValidationError("class_names must be non-empty strings")
        c = len(names)
        if labels.size and (int(labels.min()) < -1 or int(labels.max()) >= c):
            raise ValidationError(
                f"labels must lie in [0, {c}) or be the -1 sentinel; "
                f"found range [{int(labels.min())}, {int(labels.max())}]"
            )
        if self.normalized:
            _check_unit_rows(vectors, NORM_ATOL, "normalized EmbeddingSet")
        vectors.setflags(write=False)
        labels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def f(self) -> int:
        return self.vectors.shape[1]

    @property
    def c(self) -> int:
        return len(self.class_names)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingSet):
            return NotImplemented
        return (
            self.class_names == other.class_names
            and self.normalized == other.normalized
            and self.source_kind == other.source_kind
            and self.vectors.shape == other.vectors.shape
            and self.vectors.tobytes() == other.vectors.tobytes()
            and self.labels.tobytes() == other.labels.tobytes()
        )


@dataclass(frozen=True, eq=False)
class TextEmbeddings:
    """One L2-normalized text embedding per class, in class order."""

    vectors: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        names = tuple(self.class_names)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "class_names", names)
        if vectors.ndim != 2 or vectors.shape[0] != len(names) or not names:
            raise ValidationError(
                f"need one row per class: {vectors.shape} rows vs {len(names)} names"
            )
        if len(set(names)) != len(names):
            raise ValidationError("class_names must be unique")
        _check_unit_rows(vectors, NORM_ATOL, "TextEmbeddings")
        vectors.setflags(write=False)

    @property
    def c(self) -> int:
        return len(self.class_names)

    @property
    def f(self) -> int:
        return self.vectors.shape[1]

    @classmethod
    def from_embedding_set(cls, es: EmbeddingSet) -> "TextEmbeddings":
        """Interpret a text-source set with labels 0..C-1 as per-class rows."""
        if es.n != es.c or not np.array_equal(es.labels, np.arange(es.c, dtype=np.int32)):
            raise ValidationError(
                "text embedding set must hold exactly one row per class with labels 0..C-1"
            )
        return cls(vectors=es.vectors, class_names=es.class_names)


@dataclass(frozen=True)
class DatasetManifest:
    """Static facts about one benchmark dataset."""

    name: str
    concept_group: ConceptGroup
    categories: tuple[str, ...]
    defined_template: str
    metric_kind: MetricKind
    validation_size: int

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "concept_group", ConceptGroup(self.concept_group))
        object.__setattr__(self, "metric_kind", MetricKind(self.metric_kind))
        if not self.name:
            raise ValidationError("manifest name must be non-empty")
        if not self.categories:
            raise ValidationError("manifest categories must be non-empty")
        if len(set(self.categories)) != len(self.categories):
            raise ValidationError("manifest categories must be unique")
        if any((not c) for c in self.categories):
            raise ValidationError("manifest categories must be non-empty strings")
        if self.defined_template.count("{}") != 1:
            raise ValidationError(
                f"defined_template must contain exactly one '{{}}' placeholder: "
                f"{self.defined_template!r}"
            )
        if self.validation_size < 0:
            raise ValidationError("validation_size must be >= 0")


@dataclass
class ValidationReport:
    """List of manifest/embedding-set mismatches; empty means compatible."""

    entries: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries


def l2_normalize(es: EmbeddingSet) -> EmbeddingSet:
    """Return a copy whose rows have unit L2 norm (flag set).

    Norms are computed in 64 bits; a zero row cannot be normalized and
    raises DegenerateVectorError naming the offending row.
    """
    norms = row_norms(es.vectors)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DegenerateVectorError(f"row {int(zero[0])} is the zero vector")
    vectors = (es.vectors.astype(np.float64) / norms[:, None]).astype(np.float32)
    return EmbeddingSet(
        vectors=vectors,
        labels=es.labels,
        class_names=es.class_names,
        normalized=True,
        source_kind=es.source_kind,
    )


def require_normalized(es: EmbeddingSet, what: str) -> None:
    if not es.normalized:
        raise ValidationError(f"{what} must be L2-normalized (run l2_normalize first)")


def _header_dict(es: EmbeddingSet) -> dict:
    return {
        "version": 1,
        "n": es.n,
        "f": es.f,
        "c": es.c,
        "dtype": "f32",
        "normalized": bool(es.normalized),
        "source_kind": es.source_kind.value,
        "class_names": list(es.class_names),
    }


def encode_embedding_set(es: EmbeddingSet, extra_header: dict | None = None) -> bytes:
    """Serialize to the `.gbe` byte layout (deterministic)."""
    header = _header_dict(es)
    if extra_header:
        overlap = set(extra_header) & set(header)
        if overlap:
            raise ValidationError(f"extra_header may not override {sorted(overlap)}")
        header.update(extra_header)
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    header_bytes = blob.encode("utf-8")
    return b"".join(
        [
            MAGIC,
            struct.pack("<I", len(header_bytes)),
            header_bytes,
            es.labels.astype("<i4").tobytes(),
            es.vectors.astype("<f4").tobytes(),
        ]
    )


def save_embedding_set(es: EmbeddingSet, path: str | Path, extra_header: dict | None = None) -> None:
    data = encode_embedding_set(es, extra_header)
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def decode_embedding_set(data: bytes) -> tuple[EmbeddingSet, dict]:
    """Parse `.gbe` bytes; returns the set plus the raw JSON header."""
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError("not a .gbe file: bad magic")
    (header_len,) = struct.unpack("<I", data[4:8])
    if len(data) < 8 + header_len:
        raise FormatError("truncated header")
    try:
        header = json.loads(data[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable header: {exc}") from exc
    for key in ("version", "n", "f", "c", "dtype", "normalized", "source_kind", "class_names"):
        if key not in header:
            raise FormatError(f"header missing field {key!r}")
    if header["version"] != 1:
        raise FormatError(f"unsupported version {header['version']!r}")
    if header["dtype"] != "f32":
        raise FormatError(f"unsupported dtype {header['dtype']!r}")
    n, f = int(header["n"]), int(header["f"])
    if n < 1 or f < 1:
        raise FormatError(f"header declares empty payload n={n} f={f}")
    offset = 8 + header_len
    need = offset + 4 * n + 4 * n * f
    if len(data) < need:
        raise FormatError(f"truncated payload: have {len(data)} bytes, need {need}")
    if len(data) > need:
        raise FormatError(f"trailing garbage: have {len(data)} bytes, expected {need}")
    labels = np.frombuffer(data, dtype="<i4", count=n, offset=offset)
    vectors = np.frombuffer(data, dtype="<f4", count=n * f, offset=offset + 4 * n)
    if len(header["class_names"]) != int(header["c"]):
        raise FormatError("header c does not match class_names length")
    es = EmbeddingSet(
        vectors=vectors.reshape(n, f),
        labels=labels,
        class_names=tuple(header["class_names"]),
        normalized=bool(header["normalized"]),
        source_kind=SourceKind(header["source_kind"]),
    )
    return es, header


def load_embedding_set(path: str | Path) -> EmbeddingSet:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    es, _ = decode_embedding_set(data)
    return es


def validate_manifest(manifest: DatasetManifest, es: EmbeddingSet) -> ValidationReport:
    """Check that an embedding set matches a dataset manifest.

    Mismatches become report entries; an empty report means compatible.
    """
    report = ValidationReport()
    cats, names = manifest.categories, es.class_names
    if len(cats) != len(names):
        report.entries.append(
            f"category-count: manifest has {len(cats)} categories, set has {len(names)} classes"
        )
    elif cats != names:
        if sorted(cats) == sorted(names):
            report.entries.append(
                "name-order: manifest categories and set class_names hold the same "
                "names in different order"
            )
        else:
            missing = [c for c in cats if c not in names]
            extra = [c for c in names if c not in cats]
            report.entries.append(
                f"name-mismatch: manifest-only={missing!r} set-only={extra!r}"
            )
    if manifest.metric_kind == MetricKind.ROC_AUC and len(cats) != 2:
        report.entries.append(
            f"metric-shape: roc_auc requires exactly 2 categories, manifest has {len(cats)}"
        )
    return report


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "name": manifest.name,
        "concept_group": manifest.concept_group.value,
        "categories": list(manifest.categories),
        "defined_template": manifest.defined_template,
        "metric_kind": manifest.metric_kind.value,
        "validation_size": manifest.validation_size,
    }


def manifest_from_dict(data: dict) -> DatasetManifest:
    try:
        return DatasetManifest(
            name=data["name"],
            concept_group=ConceptGroup(data["concept_group"]),
            categories=tuple(data["categories"]),
            defined_template=data["defined_template"],
            metric_kind=MetricKind(data["metric_kind"]),
            validation_size=int(data["validation_size"]),
        )
    except KeyError as exc:
        raise ValidationError(f"manifest missing field {exc}") from exc


def load_manifest(path: str | Path) -> DatasetManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest {path} is not valid JSON: {exc}") from exc
    return manifest_from_dict(data)


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    blob = json.dumps(manifest_to_dict(manifest), indent=2, ensure_ascii=False) + "\n"
    try:
        Path(path).write_text(blob, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def builtin_manifest_names() -> list[str]:
    """Slugs of the dataset manifests shipped with the package."""
    root = resources.files("embeval") / "fixtures" / "manifests"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_builtin_manifest(slug: str) -> DatasetManifest:
    root = resources.files("embeval") / "fixtures" / "manifests"
    candidate = root / f"{slug}.json"
    if not candidate.is_file():
        raise ValidationError(
            f"no builtin manifest {slug!r}; available: {builtin_manifest_names()}"
        )
    return manifest_from_dict(json.loads(candidate.read_text(encoding="utf-8")))
