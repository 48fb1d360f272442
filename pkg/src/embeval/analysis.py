"""Correlation statistics, benchmark-table aggregation, report emission.

aggregate_report turns a flat list of per-(dataset, model, strategy)
records into row means over datasets plus per-dataset best/second-best
markers (ties go to the first-listed row). emit serializes a report to
CSV (fixed 6-decimal formatting) or JSON; both are byte-deterministic.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .cost import CostTable, total_cost
from .errors import DegenerateInputError, ParseError, ValidationError
from .store import ConceptGroup, DatasetManifest, SourceKind

CSV_COLUMNS = ("dataset", "model", "strategy", "shots", "metric", "value", "baseline", "delta")


@dataclass(frozen=True)
class EvalRecord:
    """One metric value for one (dataset, model, strategy, shots) cell."""

    dataset: str
    model: str
    strategy: str
    shots: int
    metric_name: str
    value: float
    baseline: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValidationError(f"value must be finite, got {self.value!r}")
        if self.baseline is not None and not np.isfinite(self.baseline):
            raise ValidationError(f"baseline must be finite, got {self.baseline!r}")
        if self.shots < 0:
            raise ValidationError(f"shots must be >= 0, got {self.shots}")


@dataclass
class EvalReport:
    records: tuple[EvalRecord, ...]
    row_means: dict[tuple[str, str], float] = field(default_factory=dict)
    best_markers: dict[tuple[str, str, str], str] = field(default_factory=dict)


def pearson_r(x, y) -> float:
    """Sample Pearson correlation coefficient of two equal-length sequences."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"x and y must be equal-length vectors: {x.shape} vs {y.shape}")
    if x.size < 3:
        raise ValidationError(f"need at least 3 points, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.einsum("n,n->", dx, dx))
    sy = float(np.einsum("n,n->", dy, dy))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("correlation undefined for a constant sequence")
    return float(np.einsum("n,n->", dx, dy)) / float(np.sqrt(sx) * np.sqrt(sy))


def _ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j < values.size and values[order[j]] == values[order[i]]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + 1 + j)
        i = j
    return ranks


def spearman_r(x, y) -> float:
    """Pearson correlation of average ranks; robustness companion to pearson_r."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"x and y must be equal-length vectors: {x.shape} vs {y.shape}")
    if x.size < 3:
        raise ValidationError(f"need at least 3 points, got {x.size}")
    return pearson_r(_ranks(x), _ranks(y))


def aggregate_report(records: list[EvalRecord]) -> EvalReport:
    """Row means over datasets plus per-dataset best/second-best markers.

    Every (model, strategy) row must cover exactly the same dataset set;
    missing cells are reported in the ValidationError.
    """
    if not records:
        raise ValidationError("no records to aggregate")
    rows: list[tuple[str, str]] = []
    datasets: list[str] = []
    values: dict[tuple[str, str, str], float] = {}
    for rec in records:
        row = (rec.model, rec.strategy)
        if row not in rows:
            rows.append(row)
        if rec.dataset not in datasets:
            datasets.append(rec.dataset)
        cell = (rec.model, rec.strategy, rec.dataset)
        if cell in values:
            raise ValidationError(f"duplicate cell {cell!r}")
        values[cell] = rec.value

    missing = [
        f"{model}/{strategy} missing {ds!r}"
        for model, strategy in rows
        for ds in datasets
        if (model, strategy, ds) not in values
    ]
    if missing:
        raise ValidationError("ragged rows: " + "; ".join(missing))

    row_means = {
        (model, strategy): sum(values[(model, strategy, ds)] for ds in datasets) / len(datasets)
        for model, strategy in rows
    }

    markers: dict[tuple[str, str, str], str] = {}
    for ds in datasets:
        column = [(values[(m, s, ds)], (m, s)) for m, s in rows]
        best_value = max(v for v, _ in column)
        best_row = next(r for v, r in column if v == best_value)
        markers[(*best_row, ds)] = "best"
        rest = [(v, r) for v, r in column if r != best_row]
        if rest:
            second_value = max(v for v, _ in rest)
            second_row = next(r for v, r in rest if v == second_value)
            markers[(*second_row, ds)] = "second_best"
    return EvalReport(records=tuple(records), row_means=row_means, best_markers=markers)


def scaling_series(
    records: list[EvalRecord],
    group: ConceptGroup,
    manifests: dict[str, DatasetManifest],
    table: CostTable,
    kind: SourceKind,
) -> list[tuple[int, float, float]]:
    """Per-shot-point (shots, mean value, mean cost) for one concept group.

    Costs join through the manifest category counts: the cost at a point is
    the mean over that point's datasets of total_cost(kind, shots, C_dataset).
    """
    group = ConceptGroup(group)
    group_datasets = {name for name, m in manifests.items() if m.concept_group == group}
    chosen = [r for r in records if r.dataset in group_datasets]
    if not chosen:
        raise ValidationError(f"no records for concept group {group.value!r}")
    shot_points: list[int] = []
    for rec in chosen:
        if rec.shots not in shot_points:
            shot_points.append(rec.shots)
    series = []
    for shots in shot_points:
        at_point = [r for r in chosen if r.shots == shots]
        mean_value = sum(r.value for r in at_point) / len(at_point)
        costs = [
            total_cost(table, kind, shots, len(manifests[r.dataset].categories))
            for r in at_point
        ]
        series.append((shots, mean_value, sum(costs) / len(costs)))
    return series


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def emit(report: EvalReport, format: str = "csv") -> bytes:
    """Serialize a report; identical reports always yield identical bytes."""
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in report.records:
            delta = None if r.baseline is None else r.value - r.baseline
            writer.writerow(
                [
                    r.dataset,
                    r.model,
                    r.strategy,
                    str(r.shots),
                    r.metric_name,
                    _fmt(r.value),
                    _fmt(r.baseline),
                    _fmt(delta),
                ]
            )
        return buf.getvalue().encode("utf-8")
    if format == "json":
        payload = {
            "records": [
                {
                    "dataset": r.dataset,
                    "model": r.model,
                    "strategy": r.strategy,
                    "shots": r.shots,
                    "metric": r.metric_name,
                    "value": r.value,
                    "baseline": r.baseline,
                }
                for r in report.records
            ],
            "row_means": [
                {"model": m, "strategy": s, "mean": v}
                for (m, s), v in report.row_means.items()
            ],
            "best_markers": [
                {"model": m, "strategy": s, "dataset": d, "marker": marker}
                for (m, s, d), marker in report.best_markers.items()
            ],
        }
        return (json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n").encode("utf-8")
    raise ValidationError(f"unknown format {format!r}")


def parse_records_csv(text: str) -> list[EvalRecord]:
    """Read records back from the CSV schema emit writes (delta is ignored)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty records CSV") from None
    if tuple(header) != CSV_COLUMNS:
        raise ParseError(f"bad records header {header!r}, expected {list(CSV_COLUMNS)}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise ParseError(f"line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        try:
            records.append(
                EvalRecord(
                    dataset=row[0],
                    model=row[1],
                    strategy=row[2],
                    shots=int(row[3]),
                    metric_name=row[4],
                    value=float(row[5]),
                    baseline=float(row[6]) if row[6] else None,
                )
            )
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    return records
