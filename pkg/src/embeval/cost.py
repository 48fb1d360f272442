"""Per-image acquisition cost accounting for the three external data sources.

Default per-image rates (USD): model inference 2.54e-4, web/database query
3.93e-5, human labeling 1.20e-2. Totals are rate * shots * categories.
Published round figures can disagree with exact rate arithmetic; comparisons
print the exact values and note the rounding rather than reconciling.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import FormatError, IoError, ValidationError
from .store import SourceKind

ROUNDING_FOOTNOTE = (
    "note: totals are exact per-image rate arithmetic; figures quoted "
    "elsewhere may be rounded approximations"
)

_REQUIRED = (SourceKind.GENERATIVE, SourceKind.RETRIEVAL, SourceKind.ORIGINAL)

DEFAULT_RATES = {
    SourceKind.GENERATIVE: 2.54e-4,
    SourceKind.RETRIEVAL: 3.93e-5,
    SourceKind.ORIGINAL: 1.20e-2,
}

# How the default rates were estimated; informational only, never used in
# arithmetic (the published per-image rates are authoritative).
RATE_PROVENANCE = {
    SourceKind.GENERATIVE: {
        "collection_source": "model inference",
        "instance_type": "NC24ads A100 v4 (spot)",
        "price_per_hour_usd": 1.47,
        "estimated_hours_per_1k_images": 1.74,
    },
    SourceKind.RETRIEVAL: {
        "collection_source": "text-to-text search",
        "instance_type": "E32ads v5 (spot)",
        "price_per_hour_usd": 0.21,
        "estimated_hours_per_1k_images": 0.60,
    },
    SourceKind.ORIGINAL: {
        "collection_source": "human labeling",
        "instance_type": None,
        "price_per_hour_usd": None,
        "estimated_hours_per_1k_images": None,
    },
}


@dataclass(frozen=True)
class CostTable:
    """Per-image USD rates keyed by data source kind."""

    per_image: dict[SourceKind, float]

    def __post_init__(self):
        rates = {SourceKind(k): float(v) for k, v in self.per_image.items()}
        object.__setattr__(self, "per_image", rates)
        for kind in _REQUIRED:
            if kind not in rates:
                raise ValidationError(f"cost table missing rate for {kind.value!r}")
        for kind, rate in rates.items():
            if not rate > 0:
                raise ValidationError(f"rate for {kind.value!r} must be positive, got {rate!r}")

    def rate(self, kind: SourceKind) -> float:
        kind = SourceKind(kind)
        if kind not in self.per_image:
            raise ValidationError(f"no rate for source kind {kind.value!r}")
        return self.per_image[kind]


def default_cost_table() -> CostTable:
    return CostTable(per_image=dict(DEFAULT_RATES))


def load_cost_table(path: str | Path) -> CostTable:
    """Override rates from a JSON file {"generative": ..., "retrieval": ..., "original": ...}."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"cost table {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError("cost table JSON must be an object of kind -> rate")
    try:
        return CostTable(per_image={SourceKind(k): v for k, v in data.items()})
    except ValueError as exc:
        raise ValidationError(f"unknown source kind in cost table: {exc}") from exc


def total_cost(table: CostTable, kind: SourceKind, shots: int, n_categories: int) -> float:
    """USD to acquire `shots` images for each of `n_categories` categories."""
    if shots < 0:
        raise ValidationError(f"shots must be nonnegative, got {shots}")
    if n_categories < 1:
        raise ValidationError(f"n_categories must be positive, got {n_categories}")
    return table.rate(kind) * shots * n_categories


def cost_curve(
    table: CostTable, kind: SourceKind, shot_points: list[int], n_categories: int
) -> list[tuple[int, float]]:
    """Total cost at each shot count; shot_points must be strictly increasing."""
    if not shot_points:
        raise ValidationError("shot_points must be non-empty")
    for prev, curr in zip(shot_points, shot_points[1:]):
        if curr <= prev:
            raise ValidationError(f"shot_points must be strictly increasing: {prev} -> {curr}")
    return [(int(s), total_cost(table, kind, int(s), n_categories)) for s in shot_points]
