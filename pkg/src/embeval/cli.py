"""Command-line entry point wiring the toolkit's workflows together.

Exit codes: 0 success, 1 validation/input errors, 2 numerical errors.
Identical argv plus identical input files produce byte-identical stdout.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, cost as costmodel, distmetrics, prompts as promptgen, retrieval
from .cler import class_centers, cler_ensemble, cler_score, zero_shot_score
from .errors import EmbevalError, NumericalError, ValidationError
from .probe import evaluate_metric, probe_scores, save_probe_model, train_linear_probe
from .store import (
    EmbeddingSet,
    MetricKind,
    SourceKind,
    TextEmbeddings,
    l2_normalize,
    load_builtin_manifest,
    load_embedding_set,
    load_manifest,
)


def _write_out(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_normalized(path: str) -> EmbeddingSet:
    es = load_embedding_set(path)
    return es if es.normalized else l2_normalize(es)


def _load_text(path: str) -> TextEmbeddings:
    es = _load_normalized(path)
    return TextEmbeddings.from_embedding_set(es)


def _scores_output(pairs: list[tuple[str, float]], fmt: str | None, out: str | None) -> None:
    if fmt == "json":
        _write_out(json.dumps(dict(pairs), sort_keys=True) + "\n", out)
    else:
        _write_out("".join(f"{k} {v:.6f}\n" for k, v in pairs), out)


def _cmd_cler(args) -> int:
    external = _load_normalized(args.external)
    test = _load_normalized(args.test)
    centers = class_centers(external)
    pairs = [("cler", cler_score(centers, test))]
    if args.text:
        text = _load_text(args.text)
        pairs.append(("zero_shot", zero_shot_score(text, test)))
        if args.ensemble:
            pairs.append(("ensemble", cler_ensemble(centers, text, test)))
    elif args.ensemble:
        raise ValidationError("--ensemble needs --text embeddings")
    _scores_output(pairs, args.format, args.out)
    return 0


def _cmd_probe(args) -> int:
    train = _load_normalized(args.train)
    test = _load_normalized(args.test)
    model = train_linear_probe(train, lam=args.reg, max_iter=args.max_iter, tol=args.tol)
    preds = probe_scores(model, test)
    value = evaluate_metric(preds, test.labels, MetricKind(args.metric))
    if args.save_model:
        save_probe_model(model, train.class_names, args.save_model)
    pairs = [
        (f"probe_{args.metric}", value),
        ("iterations", float(model.training_trace[-1][0])),
        ("final_loss", model.training_trace[-1][1]),
    ]
    _scores_output(pairs, args.format, args.out)
    return 0


def _cmd_fid(args) -> int:
    a = load_embedding_set(args.a)
    b = load_embedding_set(args.b)
    if args.normalize:
        a, b = l2_normalize(a), l2_normalize(b)
    value = distmetrics.frechet_distance(
        distmetrics.gaussian_stats(a), distmetrics.gaussian_stats(b)
    )
    _scores_output([("fid", value)], args.format, args.out)
    return 0


def _cmd_clipscore(args) -> int:
    images = _load_normalized(args.images)
    text = _load_text(args.text)
    _scores_output([("clip_score", distmetrics.clip_score(images, text))], args.format, args.out)
    return 0


def _cmd_mts(args) -> int:
    index = retrieval.load_retrieval_index(args.corpus, args.ids)
    queries = _load_text(args.queries)
    rows = [np.asarray(queries.vectors[i], dtype=np.float64) for i in range(queries.c)]

    def one(row) -> float:
        return retrieval.category_mts(index, row, args.k)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            per_category = list(pool.map(one, rows))
    else:
        per_category = [one(row) for row in rows]
    lines = [
        f"mts {name} {value:.6f}\n"
        for name, value in zip(queries.class_names, per_category)
    ]
    lines.append(f"dataset_mts {retrieval.dataset_mts(per_category):.6f}\n")
    if args.format == "json":
        payload = {
            "per_category": dict(zip(queries.class_names, per_category)),
            "dataset_mts": retrieval.dataset_mts(per_category),
        }
        _write_out(json.dumps(payload, sort_keys=True) + "\n", args.out)
    else:
        _write_out("".join(lines), args.out)
    return 0


def _cmd_retrieve(args) -> int:
    index = retrieval.load_retrieval_index(args.corpus, args.ids)
    queries = load_embedding_set(args.query)
    if not queries.normalized:
        queries = l2_normalize(queries)
    if not 0 <= args.row < queries.n:
        raise ValidationError(f"--row {args.row} out of range for {queries.n} query rows")
    query = np.asarray(queries.vectors[args.row], dtype=np.float64)
    hits = retrieval.topk(index, query, args.k)
    if args.format == "json":
        payload = [{"rank": h.rank, "id": h.id, "similarity": h.similarity} for h in hits]
        _write_out(json.dumps(payload) + "\n", args.out)
    else:
        _write_out("".join(f"{h.rank} {h.id} {h.similarity:.6f}\n" for h in hits), args.out)
    return 0


def _load_manifest_arg(spec: str):
    path = Path(spec)
    if path.exists():
        return load_manifest(path)
    return load_builtin_manifest(spec)


def _cmd_prompts(args) -> int:
    manifest = _load_manifest_arg(args.manifest)
    strategy = promptgen.PromptStrategy(
        kind=promptgen.PromptKind(_STRATEGY_ALIASES[args.strategy]),
        modifiers=frozenset(
            promptgen.PromptKind(_STRATEGY_ALIASES[m]) for m in args.modifier
        ),
    )
    ce_sentences = None
    if args.ce_file:
        ce_sentences = promptgen.load_ce_sentences(args.ce_file)
    records = promptgen.render_prompts(
        manifest,
        args.category,
        strategy,
        n=args.count,
        seed=args.seed,
        ce_sentences=ce_sentences,
        raw_name=args.raw_name,
        max_siblings=args.max_siblings,
    )
    _write_out(promptgen.records_to_jsonl(records), args.out)
    return 0


def _cmd_cost(args) -> int:
    table = costmodel.load_cost_table(args.table) if args.table else costmodel.default_cost_table()
    kind = SourceKind(args.kind)
    if args.shot_points:
        points = [int(s) for s in args.shot_points.split(",")]
        curve = costmodel.cost_curve(table, kind, points, args.categories)
        _write_out("".join(f"{s} {usd:.2f}\n" for s, usd in curve), args.out)
        return 0
    total = costmodel.total_cost(table, kind, args.shots, args.categories)
    lines = [f"{total:.2f}\n"]
    if args.compare:
        other = costmodel.total_cost(table, SourceKind(args.compare), args.shots, args.categories)
        lines.append(f"{args.compare} {other:.2f}\n")
        lines.append(f"gap {other - total:.2f}\n")
        lines.append(costmodel.ROUNDING_FOOTNOTE + "\n")
    _write_out("".join(lines), args.out)
    return 0


def _cmd_report(args) -> int:
    text = Path(args.records).read_text(encoding="utf-8")
    records = analysis.parse_records_csv(text)
    report = analysis.aggregate_report(records)
    data = analysis.emit(report, format=args.format or "csv")
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def _cmd_correlate(args) -> int:
    text = Path(args.csv).read_text(encoding="utf-8")
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or args.x not in rows[0] or args.y not in rows[0]:
        raise ValidationError(f"csv must have columns {args.x!r} and {args.y!r}")
    x = [float(r[args.x]) for r in rows]
    y = [float(r[args.y]) for r in rows]
    fn = analysis.spearman_r if args.method == "spearman" else analysis.pearson_r
    _scores_output([(f"{args.method}_r", fn(x, y))], args.format, args.out)
    return 0


def _cmd_timings(args) -> int:
    external = _load_normalized(args.external)
    test = _load_normalized(args.test)
    text = _load_text(args.text)

    def run_cler():
        cler_score(class_centers(external), test)

    def run_ensemble():
        cler_ensemble(class_centers(external), text, test)

    def run_clip_score():
        distmetrics.clip_score(test, text)

    def run_fid():
        distmetrics.frechet_distance(
            distmetrics.gaussian_stats(external), distmetrics.gaussian_stats(test)
        )

    def run_probe():
        model = train_linear_probe(external, lam=args.reg, max_iter=args.max_iter, tol=args.tol)
        evaluate_metric(probe_scores(model, test), test.labels, MetricKind.ACCURACY)

    jobs = [
        ("cler", run_cler),
        ("ensemble", run_ensemble),
        ("clip_score", run_clip_score),
        ("fid", run_fid),
        ("probe", run_probe),
    ]
    lines = []
    for name, fn in jobs:
        fn()  # dry run as pre-heat
        samples = []
        for _ in range(3):
            start = time.perf_counter()
            fn()
            samples.append(time.perf_counter() - start)
        mean = sum(samples) / len(samples)
        var = sum((s - mean) ** 2 for s in samples) / (len(samples) - 1)
        stderr = (var / len(samples)) ** 0.5
        lines.append(f"{name} {mean:.6f} {stderr:.6f}\n")
    _write_out("".join(lines), args.out)
    return 0


_STRATEGY_ALIASES = {
    "st": "simple_template",
    "dt": "defined_template",
    "ce": "category_enhancement",
    "rd": "restrictive_description",
    "np": "negative_prompts",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embeval",
        description="Training-free valuation of external training data on precomputed embeddings.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for any sampling (default 0)")
    common.add_argument("--out", default=None, help="write results to this file instead of stdout")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--threads", type=int, default=1,
                        help="fan-out across datasets/categories where supported")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cler", parents=[common],
                       help="training-free class-center score of an external set")
    p.add_argument("--external", required=True, help="labeled external embeddings (.gbe)")
    p.add_argument("--test", required=True, help="labeled test embeddings (.gbe)")
    p.add_argument("--text", default=None, help="per-class text embeddings (.gbe)")
    p.add_argument("--ensemble", action="store_true",
                   help="also report the prototype+text ensemble score")
    p.set_defaults(fn=_cmd_cler)

    p = sub.add_parser("probe", parents=[common], help="train/evaluate the linear probe")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--reg", type=float, default=1e-4, help="L2 weight penalty (default 1e-4)")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--metric", choices=[k.value for k in MetricKind], default="accuracy")
    p.add_argument("--save-model", default=None, help="persist the probe as a .gbe container")
    p.set_defaults(fn=_cmd_probe)

    p = sub.add_parser("fid", parents=[common],
                       help="Fréchet distance between two embedding distributions")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--normalize", action="store_true",
                   help="L2-normalize rows before fitting the Gaussians")
    p.set_defaults(fn=_cmd_fid)

    p = sub.add_parser("clipscore", parents=[common],
                       help="mean image-to-own-class-text cosine similarity")
    p.add_argument("--images", required=True)
    p.add_argument("--text", required=True)
    p.set_defaults(fn=_cmd_clipscore)

    p = sub.add_parser("mts", parents=[common],
                       help="mean text similarity of top-k corpus hits per category")
    p.add_argument("--corpus", required=True, help="corpus embeddings (.gbe, labels all -1)")
    p.add_argument("--ids", required=True, help="sidecar id file, one id per corpus row")
    p.add_argument("--queries", required=True, help="per-category query embeddings (.gbe)")
    p.add_argument("-k", type=int, default=100)
    p.set_defaults(fn=_cmd_mts)

    p = sub.add_parser("retrieve", parents=[common], help="exact top-k cosine retrieval")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ids", required=True)
    p.add_argument("--query", required=True, help=".gbe file holding the query row(s)")
    p.add_argument("--row", type=int, default=0, help="query row index (default 0)")
    p.add_argument("-k", type=int, default=100)
    p.set_defaults(fn=_cmd_retrieve)

    p = sub.add_parser("prompts", parents=[common],
                       help="compile generation prompts for one category")
    p.add_argument("--manifest", required=True,
                   help="manifest JSON path or builtin manifest slug")
    p.add_argument("--category", required=True)
    p.add_argument("--strategy", required=True, choices=sorted(_STRATEGY_ALIASES))
    p.add_argument("--modifier", action="append", default=[], choices=["rd", "np"],
                   help="composable modifier; may repeat")
    p.add_argument("-n", "--count", type=int, default=1)
    p.add_argument("--raw-name", action="store_true",
                   help="bare category name instead of the simple template")
    p.add_argument("--ce-file", default=None, help="category<TAB>sentence file")
    p.add_argument("--max-siblings", type=int, default=5)
    p.set_defaults(fn=_cmd_prompts)

    p = sub.add_parser("cost", parents=[common], help="acquisition cost accounting")
    p.add_argument("--kind", required=True, choices=["generative", "retrieval", "original"])
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--categories", type=int, required=True)
    p.add_argument("--table", default=None, help="JSON file overriding the per-image rates")
    p.add_argument("--shot-points", default=None,
                   help="comma-separated shot counts for a cost curve")
    p.add_argument("--compare", default=None, choices=["generative", "retrieval", "original"],
                   help="also print another kind's total and the exact gap")
    p.set_defaults(fn=_cmd_cost)

    p = sub.add_parser("report", parents=[common],
                       help="aggregate a records CSV into row means and best markers")
    p.add_argument("--records", required=True)
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("correlate", parents=[common],
                       help="correlation between two numeric CSV columns")
    p.add_argument("--csv", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--method", choices=["pearson", "spearman"], default="pearson")
    p.set_defaults(fn=_cmd_correlate)

    p = sub.add_parser("timings", parents=[common],
                       help="wall-clock each metric three times after a warm-up run")
    p.add_argument("--external", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--reg", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(fn=_cmd_timings)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except EmbevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
