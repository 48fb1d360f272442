"""Acceptance suite: one test per release criterion, at the stated tolerance.

Each criterion prints a `[PASS]`/`[FAIL]` line (visible with `pytest -s`).
The whole module runs on synthetic fixtures generated here; nothing below
needs the extraction adapter or any external model.
"""
import time
from contextlib import contextmanager
from importlib import resources

import numpy as np
import pytest

from embeval.analysis import aggregate_report, parse_records_csv, pearson_r
from embeval.cler import class_centers, cler_ensemble, cler_score, predict_centered
from embeval.cli import run
from embeval.cost import default_cost_table, total_cost
from embeval.distmetrics import frechet_distance, gaussian_stats
from embeval.probe import (
    evaluate_metric,
    probe_gradients,
    probe_scores,
    train_linear_probe,
)
from embeval.cler import PredictionVector
from embeval.prompts import PromptKind, PromptStrategy, render_prompts
from embeval.retrieval import category_mts, topk
from embeval.store import (
    EmbeddingSet,
    MetricKind,
    SourceKind,
    TextEmbeddings,
    l2_normalize,
    load_builtin_manifest,
    save_embedding_set,
)

from conftest import blob_sets, random_set
from test_cler import oracle_nearest_centroid_accuracy
from test_probe import fd_gradients, oracle_pairwise_auc
from test_retrieval import corpus_index, oracle_topk, unit


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def test_cler_oracle_equivalence_bit_exact_under_5s():
    with criterion("CLER oracle equivalence (50 random instances, bit-exact, <5s)"):
        rng = np.random.default_rng(1001)
        start = time.perf_counter()
        for _ in range(50):
            c = int(rng.integers(2, 21))
            n_ext = int(rng.integers(c, 501))
            n_test = int(rng.integers(c, 501))
            f = int(rng.integers(2, 65))
            external = random_set(rng, n=n_ext, f=f, c=c)
            test = random_set(rng, n=n_test, f=f, c=c, source_kind=SourceKind.TEST)
            got = cler_score(class_centers(external), test)
            want = oracle_nearest_centroid_accuracy(external, test)
            assert got == want
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_ensemble_degeneracy_rowwise():
    with criterion("Ensemble degeneracy (text == centers, 20 random instances)"):
        rng = np.random.default_rng(1002)
        for _ in range(20):
            c = int(rng.integers(2, 12))
            f = int(rng.integers(c, 33))
            external = random_set(rng, n=int(rng.integers(c, 200)), f=f, c=c)
            test = random_set(
                rng, n=int(rng.integers(c, 200)), f=f, c=c, source_kind=SourceKind.TEST
            )
            centers = class_centers(external)
            text = TextEmbeddings(
                vectors=centers.centers.astype(np.float32),
                class_names=test.class_names,
            )
            centered = predict_centered(centers, test)
            ensemble_scores = (
                np.einsum("nf,cf->nc", test.vectors.astype(np.float64), centers.centers)
                + np.einsum(
                    "nf,cf->nc",
                    test.vectors.astype(np.float64),
                    text.vectors.astype(np.float64),
                )
            ) / 2.0
            ensemble_preds = np.argmax(ensemble_scores, axis=1)
            assert np.array_equal(ensemble_preds, centered.predicted_labels)
            assert cler_ensemble(centers, text, test) == cler_score(centers, test)


def test_cost_reproduction():
    with criterion("Cost reproduction (208.03 generative / 9828.00 original)"):
        table = default_cost_table()
        generative = total_cost(table, SourceKind.GENERATIVE, 500, 1638)
        original = total_cost(table, SourceKind.ORIGINAL, 500, 1638)
        assert abs(generative - 208.03) <= 0.01
        assert abs(original - 9828.00) <= 0.01


def test_benchmark_table_fixture_row_means():
    with criterion("Benchmark table fixture aggregation (8 row means within 0.01)"):
        text = (resources.files("embeval") / "fixtures" / "table2.csv").read_text("utf-8")
        report = aggregate_report(parse_records_csv(text))
        expected = {
            ("GLIDE", "ST"): 48.48,
            ("GLIDE", "CE"): 46.93,
            ("GLIDE", "DT"): 52.04,
            ("StableDiffusion", "ST"): 48.83,
            ("StableDiffusion", "CE"): 47.68,
            ("StableDiffusion", "DT"): 51.60,
            ("StableDiffusion", "NP"): 51.10,
            ("StableDiffusion", "NP+RD"): 52.01,
        }
        for row, want in expected.items():
            assert abs(report.row_means[row] - want) <= 0.01, row


def test_fid_numerics_under_1s():
    with criterion("FID numerics (identity, 1-D closed form, symmetry, rotation, <1s)"):
        rng = np.random.default_rng(1003)
        start = time.perf_counter()

        def stats_of(rows):
            es = EmbeddingSet(
                vectors=np.asarray(rows, dtype=np.float32),
                labels=np.zeros(len(rows), dtype=np.int32),
                class_names=("x",),
                normalized=False,
                source_kind=SourceKind.GENERATIVE,
            )
            return gaussian_stats(es)

        x = rng.standard_normal((200, 64))
        sx = stats_of(x)
        assert frechet_distance(sx, sx) <= 1e-6

        from embeval.distmetrics import GaussianStats

        a = GaussianStats(mean=np.array([0.0]), covariance=np.array([[1.0]]), count=10)
        b = GaussianStats(mean=np.array([3.0]), covariance=np.array([[4.0]]), count=10)
        assert abs(frechet_distance(a, b) - 10.0) <= 1e-8

        y = rng.standard_normal((180, 64)) * 1.3 + 0.2
        sy = stats_of(y)
        assert abs(frechet_distance(sx, sy) - frechet_distance(sy, sx)) <= 1e-8

        q, _ = np.linalg.qr(rng.standard_normal((64, 64)))
        rotated = frechet_distance(stats_of(x @ q), stats_of(y @ q))
        assert abs(rotated - frechet_distance(sx, sy)) <= 1e-6

        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_probe_gradients_and_separable_convergence():
    with criterion("Probe gradient check (rel err <= 1e-4) + separable convergence"):
        rng = np.random.default_rng(1004)
        for _ in range(10):
            c = int(rng.integers(2, 6))
            f = int(rng.integers(2, 11))
            n = int(rng.integers(c, 40))
            x = rng.standard_normal((n, f))
            y = np.concatenate([np.arange(c), rng.integers(0, c, n - c)]).astype(np.int64)
            weights = 0.5 * rng.standard_normal((c, f))
            biases = 0.5 * rng.standard_normal(c)
            lam = float(rng.choice([0.0, 1e-4, 1e-2]))
            grad_w, grad_b = probe_gradients(weights.copy(), biases.copy(), x, y, lam)
            fd_w, fd_b = fd_gradients(weights, biases, x, y, lam)
            assert np.abs(grad_w - fd_w).max() / max(1e-12, np.abs(fd_w).max()) <= 1e-4
            assert np.abs(grad_b - fd_b).max() / max(1e-12, np.abs(fd_b).max()) <= 1e-4

        vectors = np.zeros((20, 4), dtype=np.float64)
        vectors[:10, 0] = 1.0
        vectors[10:, 0] = -1.0
        vectors += 0.01 * rng.standard_normal((20, 4))
        train = l2_normalize(
            EmbeddingSet(
                vectors=vectors.astype(np.float32),
                labels=np.repeat([0, 1], 10).astype(np.int32),
                class_names=("plus", "minus"),
                normalized=False,
                source_kind=SourceKind.ORIGINAL,
            )
        )
        model = train_linear_probe(train, lam=1e-4, max_iter=500, tol=1e-6)
        accuracy = evaluate_metric(probe_scores(model, train), train.labels, MetricKind.ACCURACY)
        assert accuracy == 1.0
        assert model.training_trace[-1][0] <= 500


def test_metric_oracles():
    with criterion("Metric oracles (ROC AUC pairs N<=50, perfect mAP, mean-per-class)"):
        rng = np.random.default_rng(1005)
        for _ in range(25):
            n = int(rng.integers(4, 51))
            labels = np.zeros(n, dtype=np.int64)
            labels[: max(1, int(rng.integers(1, n)))] = 1
            rng.shuffle(labels)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            pos = np.round(rng.random(n), 1)  # ties on purpose
            preds = PredictionVector.from_scores(np.stack([1 - pos, pos], axis=1))
            got = evaluate_metric(preds, labels, MetricKind.ROC_AUC)
            assert got == pytest.approx(oracle_pairwise_auc(pos, labels), abs=1e-12)

        perfect = PredictionVector.from_scores(
            np.array([[0.9, 0.1], [0.8, 0.0], [0.2, 0.7], [0.1, 0.6]])
        )
        assert evaluate_metric(perfect, [0, 0, 1, 1], MetricKind.MAP_11PT) == 1.0

        scores = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        hand = PredictionVector.from_scores(scores)
        assert evaluate_metric(hand, [0, 0, 1], MetricKind.MEAN_PER_CLASS) == pytest.approx(0.75)


def test_retrieval_exactness_50_corpora():
    with criterion("Retrieval exactness (50 random corpora vs full-scan oracle) + MTS"):
        rng = np.random.default_rng(1006)
        for _ in range(50):
            n = int(rng.integers(5, 5001))
            f = int(rng.integers(2, 17))
            k = int(rng.integers(1, min(n, 50) + 1))
            index = corpus_index(rng.standard_normal((n, f)))
            query = unit(rng.standard_normal(f))
            hits = topk(index, query, k)
            assert [(h.id, h.similarity) for h in hits] == oracle_topk(index, query, k)

        row = unit(np.array([0.2, -0.7, 0.4]))
        identical = corpus_index(np.stack([row] * 10))
        assert category_mts(identical, row, 10) == pytest.approx(1.0, abs=1e-6)


def test_pearson_and_affine_invariance():
    with criterion("Pearson (y=2x+1 -> 1.0 within 1e-12; affine invariance)"):
        x = list(range(1, 11))
        assert pearson_r(x, [2 * v + 1 for v in x]) == pytest.approx(1.0, abs=1e-12)
        rng = np.random.default_rng(1007)
        for _ in range(20):
            xs = rng.standard_normal(15)
            ys = rng.standard_normal(15)
            base = pearson_r(xs, ys)
            a, c = float(rng.uniform(0.1, 4.0)), float(rng.uniform(0.1, 4.0))
            b, d = float(rng.normal()), float(rng.normal())
            assert pearson_r(a * xs + b, c * ys + d) == pytest.approx(base, abs=1e-10)
            assert pearson_r(-a * xs + b, c * ys + d) == pytest.approx(-base, abs=1e-10)


def test_prompt_determinism_and_fidelity():
    with criterion("Prompt determinism + byte-exact template strings"):
        pets = load_builtin_manifest("oxford_pets")
        dt = PromptStrategy(kind=PromptKind.DEFINED_TEMPLATE)
        record = render_prompts(pets, "British Shorthair", dt, n=1, seed=0)[0]
        assert record.positive == "a photo of a British Shorthair, a type of pet."

        rd = PromptStrategy(
            kind=PromptKind.DEFINED_TEMPLATE,
            modifiers=frozenset({PromptKind.RESTRICTIVE_DESCRIPTION}),
        )
        with_rd = render_prompts(pets, "British Shorthair", rd, n=1, seed=0)[0]
        assert with_rd.positive == (
            record.positive + ", ((sharp focus)), ((highly detailed)), ((hires))"
        )

        cifar = load_builtin_manifest("cifar10")
        np_strategy = PromptStrategy(
            kind=PromptKind.SIMPLE_TEMPLATE, modifiers=frozenset({PromptKind.NEGATIVE_PROMPTS})
        )
        for seed in (0, 1, 99):
            a = render_prompts(cifar, "airplane", np_strategy, n=9, seed=seed)
            b = render_prompts(cifar, "airplane", np_strategy, n=9, seed=seed)
            assert a == b


def test_end_to_end_synthetic_pipeline(tmp_path, capsys):
    with criterion("End-to-end synthetic pipeline (cler/probe/fid/report, <30s)"):
        start = time.perf_counter()
        rng = np.random.default_rng(1008)
        external, test, _ = blob_sets(rng, c=3, f=16, shots=40, test_per_class=60)
        paths = {}
        for name, es in (("external", external), ("test", test)):
            path = tmp_path / f"{name}.gbe"
            save_embedding_set(es, path)
            paths[name] = str(path)

        assert run(["cler", "--external", paths["external"], "--test", paths["test"]]) == 0
        cler_value = float(capsys.readouterr().out.split(" ")[1])

        assert run(["probe", "--train", paths["external"], "--test", paths["test"]]) == 0
        probe_line = capsys.readouterr().out.splitlines()[0]
        probe_value = float(probe_line.split(" ")[1])

        assert run(["fid", "--a", paths["external"], "--b", paths["test"]]) == 0
        fid_value = float(capsys.readouterr().out.split(" ")[1])

        records = tmp_path / "records.csv"
        records.write_text(
            "dataset,model,strategy,shots,metric,value,baseline,delta\n"
            f"blobs,clip,st,40,cler,{cler_value:.6f},,\n"
            f"blobs,clip,probe,40,accuracy,{probe_value:.6f},,\n",
            encoding="utf-8",
        )
        out = tmp_path / "report.csv"
        assert run(["report", "--records", str(records), "--out", str(out)]) == 0
        assert out.read_text("utf-8").startswith("dataset,model,strategy")

        assert cler_value >= 0.95, f"cler {cler_value}"
        assert probe_value >= 0.95, f"probe {probe_value}"
        assert fid_value >= 0.0
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"took {elapsed:.2f}s"
