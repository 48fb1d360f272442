"""Adapter tests: the [SECONDARY] roundtrip criteria plus layout handling.

The files written here are validated through the consumer-side toolkit
(embeval), i.e. through the `.gbe`/manifest file contracts only.
"""
import json
from pathlib import Path

import numpy as np
import pytest

from embed_adapter.backbones import available_backbones, get_backbone
from embed_adapter.cli import build_parser, run
from embed_adapter.errors import InputLayoutError, MissingDependencyError
from embed_adapter.extract import (
    ExtractionJob,
    extract_image_embeddings,
    extract_text_embeddings,
)

from embeval.prompts import (
    PromptKind,
    PromptStrategy,
    records_to_jsonl,
    render_prompts,
)
from embeval.store import (
    ConceptGroup,
    DatasetManifest,
    MetricKind,
    load_embedding_set,
    validate_manifest,
)

# minimal valid-enough PNG payloads for the offline hash backbone
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

CATEGORIES = ("airplane", "bird")


def manifest() -> DatasetManifest:
    return DatasetManifest(
        name="toy",
        concept_group=ConceptGroup.COMMON,
        categories=CATEGORIES,
        defined_template="a photo of a {}.",
        metric_kind=MetricKind.ACCURACY,
        validation_size=6,
    )


def write_manifest(tmp_path: Path) -> Path:
    path = tmp_path / "toy.json"
    path.write_text(
        json.dumps(
            {
                "name": "toy",
                "concept_group": "common",
                "categories": list(CATEGORIES),
                "defined_template": "a photo of a {}.",
                "metric_kind": "accuracy",
                "validation_size": 6,
            }
        ),
        encoding="utf-8",
    )
    return path


def make_image_tree(tmp_path: Path, per_class: int = 3) -> Path:
    rng = np.random.default_rng(5)
    root = tmp_path / "images"
    for category in CATEGORIES:
        folder = root / category
        folder.mkdir(parents=True)
        for i in range(per_class):
            (folder / f"{i:02d}.png").write_bytes(PNG_MAGIC + rng.bytes(64))
    return root


def make_prompts_file(tmp_path: Path, n: int = 1) -> Path:
    records = []
    for category in CATEGORIES:
        records.extend(
            render_prompts(
                manifest(),
                category,
                PromptStrategy(kind=PromptKind.SIMPLE_TEMPLATE),
                n=n,
                seed=0,
            )
        )
    path = tmp_path / "prompts.jsonl"
    path.write_text(records_to_jsonl(records), encoding="utf-8")
    return path


class TestImageExtraction:
    def test_roundtrip_through_consumer_with_empty_validation_report(self, tmp_path):
        root = make_image_tree(tmp_path)
        out = tmp_path / "images.gbe"
        job = ExtractionJob(backbone="hash-64", input_path=root, output_path=out)
        summary = extract_image_embeddings(job, list(CATEGORIES))
        assert summary["images"] == 6 and summary["skipped"] == 0

        loaded = load_embedding_set(out)
        report = validate_manifest(manifest(), loaded)
        assert report.ok and report.entries == []
        assert loaded.n == 6 and loaded.f == 64
        assert list(loaded.labels) == [0, 0, 0, 1, 1, 1]

    def test_normalized_rows_within_1e3(self, tmp_path):
        root = make_image_tree(tmp_path)
        out = tmp_path / "images.gbe"
        extract_image_embeddings(
            ExtractionJob(backbone="hash-512", input_path=root, output_path=out),
            list(CATEGORIES),
        )
        loaded = load_embedding_set(out)
        assert loaded.normalized
        norms = np.linalg.norm(loaded.vectors.astype(np.float64), axis=1)
        assert float(np.abs(norms - 1.0).max()) <= 1e-3

    def test_same_inputs_twice_identical_bytes(self, tmp_path):
        root = make_image_tree(tmp_path)
        out1 = tmp_path / "a.gbe"
        out2 = tmp_path / "b.gbe"
        for out in (out1, out2):
            extract_image_embeddings(
                ExtractionJob(backbone="hash-64", input_path=root, output_path=out),
                list(CATEGORIES),
            )
        assert out1.read_bytes() == out2.read_bytes()

    def test_unreadable_image_skipped_with_sidecar_count(self, tmp_path, caplog):
        root = make_image_tree(tmp_path)
        # a dangling symlink fails on read even for root
        (root / "airplane" / "98.png").symlink_to(tmp_path / "gone.png")
        out = tmp_path / "images.gbe"
        with caplog.at_level("WARNING", logger="embed_adapter"):
            summary = extract_image_embeddings(
                ExtractionJob(backbone="hash-64", input_path=root, output_path=out),
                list(CATEGORIES),
            )
        assert summary["skipped"] == 1
        assert any("skipping unreadable" in r.message for r in caplog.records)
        sidecar = json.loads((tmp_path / "images.gbe.summary.json").read_text("utf-8"))
        assert sidecar["skipped"] == 1 and sidecar["images"] == 6
        assert load_embedding_set(out).n == 6

    def test_empty_class_hard_error(self, tmp_path):
        root = make_image_tree(tmp_path)
        for f in (root / "bird").iterdir():
            f.unlink()
        with pytest.raises(InputLayoutError, match="bird"):
            extract_image_embeddings(
                ExtractionJob(backbone="hash-64", input_path=root, output_path=tmp_path / "x.gbe"),
                list(CATEGORIES),
            )

    def test_missing_class_folder_hard_error(self, tmp_path):
        root = make_image_tree(tmp_path)
        with pytest.raises(InputLayoutError, match="cat"):
            extract_image_embeddings(
                ExtractionJob(backbone="hash-64", input_path=root, output_path=tmp_path / "x.gbe"),
                ["airplane", "bird", "cat"],
            )

    def test_header_records_backbone(self, tmp_path):
        root = make_image_tree(tmp_path)
        out = tmp_path / "images.gbe"
        extract_image_embeddings(
            ExtractionJob(backbone="hash-64", input_path=root, output_path=out),
            list(CATEGORIES),
        )
        raw = out.read_bytes()
        header_len = int.from_bytes(raw[4:8], "little")
        header = json.loads(raw[8 : 8 + header_len])
        assert header["backbone"] == "hash-64"


class TestTextExtraction:
    def test_one_row_per_category_labels_in_order(self, tmp_path):
        prompts = make_prompts_file(tmp_path, n=3)
        out = tmp_path / "text.gbe"
        extract_text_embeddings(
            ExtractionJob(backbone="hash-64", input_path=prompts, output_path=out),
            list(CATEGORIES),
        )
        loaded = load_embedding_set(out)
        assert loaded.n == len(CATEGORIES)
        assert list(loaded.labels) == list(range(len(CATEGORIES)))
        assert loaded.class_names == CATEGORIES
        assert loaded.normalized
        report = validate_manifest(manifest(), loaded)
        assert report.ok

    def test_single_prompt_row_equals_normalized_embedding(self, tmp_path):
        prompts = make_prompts_file(tmp_path, n=1)
        out = tmp_path / "text.gbe"
        extract_text_embeddings(
            ExtractionJob(backbone="hash-64", input_path=prompts, output_path=out),
            list(CATEGORIES),
        )
        loaded = load_embedding_set(out)
        backbone = get_backbone("hash-64")
        raw = backbone.encode_text("a photo of airplane").astype(np.float64)
        want = raw / np.linalg.norm(raw)
        np.testing.assert_allclose(loaded.vectors[0].astype(np.float64), want, atol=1e-6)

    def test_duplicate_prompts_match_singleton(self, tmp_path):
        single = tmp_path / "single.jsonl"
        double = tmp_path / "double.jsonl"
        line = json.dumps({"positive": "a photo of airplane", "category": "airplane"})
        bird = json.dumps({"positive": "a photo of bird", "category": "bird"})
        single.write_text(line + "\n" + bird + "\n", encoding="utf-8")
        double.write_text(line + "\n" + line + "\n" + bird + "\n", encoding="utf-8")
        outs = []
        for prompts in (single, double):
            out = tmp_path / (prompts.stem + ".gbe")
            extract_text_embeddings(
                ExtractionJob(backbone="hash-64", input_path=prompts, output_path=out),
                list(CATEGORIES),
            )
            outs.append(load_embedding_set(out))
        np.testing.assert_allclose(outs[0].vectors, outs[1].vectors, atol=1e-7)

    def test_category_without_prompts_hard_error(self, tmp_path):
        path = tmp_path / "partial.jsonl"
        path.write_text(
            json.dumps({"positive": "a photo of airplane", "category": "airplane"}) + "\n",
            encoding="utf-8",
        )
        with pytest.raises(InputLayoutError, match="bird"):
            extract_text_embeddings(
                ExtractionJob(backbone="hash-64", input_path=path, output_path=tmp_path / "t.gbe"),
                list(CATEGORIES),
            )


class TestBackbones:
    def test_available(self):
        names = available_backbones()
        assert "hash-64" in names and "clip-vit-b32" in names

    def test_real_model_backbone_reports_missing_runtime(self):
        with pytest.raises(MissingDependencyError, match="open_clip"):
            get_backbone("clip-vit-b32")

    def test_unknown_backbone(self):
        with pytest.raises(MissingDependencyError):
            get_backbone("resnet-9000")


class TestCli:
    def test_help_exits_zero(self, capsys):
        for sub in ("extract-images", "extract-text"):
            with pytest.raises(SystemExit) as exc:
                build_parser().parse_args([sub, "--help"])
            assert exc.value.code == 0
            capsys.readouterr()

    def test_extract_images_cli(self, tmp_path, capsys):
        root = make_image_tree(tmp_path)
        manifest_path = write_manifest(tmp_path)
        out = tmp_path / "cli.gbe"
        code = run([
            "extract-images", "--backbone", "hash-64", "--input", str(root),
            "--manifest", str(manifest_path), "--out", str(out),
        ])
        assert code == 0
        assert "6 rows" in capsys.readouterr().out
        assert load_embedding_set(out).n == 6

    def test_extract_text_cli(self, tmp_path, capsys):
        prompts = make_prompts_file(tmp_path)
        manifest_path = write_manifest(tmp_path)
        out = tmp_path / "cli-text.gbe"
        code = run([
            "extract-text", "--backbone", "hash-64", "--prompts", str(prompts),
            "--manifest", str(manifest_path), "--out", str(out),
        ])
        assert code == 0
        loaded = load_embedding_set(out)
        assert loaded.n == 2 and loaded.source_kind.value == "text"
