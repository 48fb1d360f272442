"""Image-folder and prompt-file extraction into `.gbe` files.

Image layout: one subfolder per manifest category, folder names matching
the category names exactly; labels follow manifest order. Unreadable
image files are skipped with a logged warning and counted in a sidecar
summary JSON next to the output; an empty category is a hard error.

Text extraction consumes prompt JSON-lines (objects with at least
"positive" and "category") and writes one row per category: the
re-normalized mean of that category's normalized prompt embeddings.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backbones import Backbone, get_backbone
from .errors import InputLayoutError
from .gbe import encode_gbe, write_gbe_atomic

log = logging.getLogger("embed_adapter")

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}


@dataclass(frozen=True)
class ExtractionJob:
    """What to encode, with which backbone, and where the file goes."""

    backbone: str
    input_path: Path
    output_path: Path
    batch_size: int = 32
    normalize: bool = True
    source_kind: str = "original"

    def __post_init__(self):
        object.__setattr__(self, "input_path", Path(self.input_path))
        object.__setattr__(self, "output_path", Path(self.output_path))
        if self.batch_size < 1:
            raise InputLayoutError("batch_size must be positive")


def load_manifest_categories(path: str | Path) -> list[str]:
    """Category names, in order, from a manifest JSON file."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    categories = data.get("categories")
    if not categories:
        raise InputLayoutError(f"manifest {path} has no categories")
    return list(categories)


def _l2_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors.astype(np.float64), axis=1, keepdims=True)
    if float(norms.min()) == 0.0:
        raise InputLayoutError("encoder produced a zero vector; cannot normalize")
    return (vectors.astype(np.float64) / norms).astype(np.float32)


def _encode_batched(backbone: Backbone, payloads: list[bytes], batch_size: int) -> np.ndarray:
    rows = []
    for start in range(0, len(payloads), batch_size):
        for payload in payloads[start : start + batch_size]:
            rows.append(backbone.encode_image_bytes(payload))
    return np.stack(rows)


def extract_image_embeddings(job: ExtractionJob, categories: list[str]) -> dict:
    """Encode a folder-per-class image tree; returns the sidecar summary."""
    backbone = get_backbone(job.backbone)
    root = job.input_path
    if not root.is_dir():
        raise InputLayoutError(f"input {root} is not a directory")
    subdirs = {p.name for p in root.iterdir() if p.is_dir()}
    missing = [c for c in categories if c not in subdirs]
    extra = sorted(subdirs - set(categories))
    if missing:
        raise InputLayoutError(f"no subfolder for categories {missing!r}")
    if extra:
        raise InputLayoutError(f"subfolders {extra!r} match no manifest category")

    payloads: list[bytes] = []
    labels: list[int] = []
    skipped: list[str] = []
    for label, category in enumerate(categories):
        # not is_file(): broken symlinks must reach the read and count as skipped
        files = sorted(
            p for p in (root / category).iterdir()
            if not p.is_dir() and p.suffix.lower() in IMAGE_EXTENSIONS
        )
        readable = 0
        for path in files:
            try:
                payloads.append(path.read_bytes())
            except OSError as exc:
                log.warning("skipping unreadable image %s: %s", path, exc)
                skipped.append(str(path))
                continue
            labels.append(label)
            readable += 1
        if readable == 0:
            raise InputLayoutError(f"category {category!r} has no readable images")

    vectors = _encode_batched(backbone, payloads, job.batch_size)
    if job.normalize:
        vectors = _l2_rows(vectors)
    data = encode_gbe(
        vectors=vectors,
        labels=np.asarray(labels, dtype=np.int32),
        class_names=categories,
        normalized=job.normalize,
        source_kind=job.source_kind,
        extra_header={"backbone": backbone.name},
    )
    write_gbe_atomic(data, job.output_path)

    summary = {
        "images": len(labels),
        "skipped": len(skipped),
        "skipped_files": skipped,
        "backbone": backbone.name,
    }
    summary_path = Path(str(job.output_path) + ".summary.json")
    summary_path.write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def read_prompt_records(path: str | Path) -> list[dict]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputLayoutError(f"{path}:{lineno}: bad JSON: {exc}") from exc
        if "positive" not in data or "category" not in data:
            raise InputLayoutError(f"{path}:{lineno}: record needs positive and category")
        records.append(data)
    return records


def extract_text_embeddings(job: ExtractionJob, categories: list[str]) -> None:
    """One row per category: re-normalized mean of its prompts' embeddings."""
    backbone = get_backbone(job.backbone)
    records = read_prompt_records(job.input_path)
    grouped: dict[str, list[str]] = {c: [] for c in categories}
    for record in records:
        category = record["category"]
        if category not in grouped:
            raise InputLayoutError(f"prompt category {category!r} not in manifest")
        grouped[category].append(record["positive"])

    rows = []
    for category in categories:
        prompts = grouped[category]
        if not prompts:
            raise InputLayoutError(f"category {category!r} has no prompts")
        encoded = _l2_rows(np.stack([backbone.encode_text(p) for p in prompts]))
        mean = encoded.astype(np.float64).mean(axis=0)
        norm = float(np.linalg.norm(mean))
        if norm == 0.0:
            raise InputLayoutError(f"category {category!r} prompts average to zero")
        rows.append((mean / norm).astype(np.float32))

    data = encode_gbe(
        vectors=np.stack(rows),
        labels=np.arange(len(categories), dtype=np.int32),
        class_names=categories,
        normalized=True,
        source_kind="text",
        extra_header={"backbone": backbone.name},
    )
    write_gbe_atomic(data, job.output_path)
