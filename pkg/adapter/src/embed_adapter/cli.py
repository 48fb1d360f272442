"""embed-adapter CLI: extract-images / extract-text."""
from __future__ import annotations

import argparse
import sys

from .errors import AdapterError
from .extract import (
    ExtractionJob,
    extract_image_embeddings,
    extract_text_embeddings,
    load_manifest_categories,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-adapter",
        description="Extract image/text embeddings into .gbe interchange files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backbone", default="hash-512",
                        help="encoder name (hash-64, hash-512, clip-vit-b32)")
    common.add_argument("--manifest", required=True, help="dataset manifest JSON")
    common.add_argument("--out", required=True, help="output .gbe path")
    common.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("extract-images", parents=[common],
                       help="encode a folder-per-class image tree")
    p.add_argument("--input", required=True, help="root directory of class subfolders")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--source-kind", default="original",
                   choices=["generative", "retrieval", "original", "test"])
    p.set_defaults(images=True)

    p = sub.add_parser("extract-text", parents=[common],
                       help="encode prompt JSON-lines into per-category rows")
    p.add_argument("--prompts", required=True, help="prompt records, one JSON per line")
    p.set_defaults(images=False)

    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    categories = load_manifest_categories(args.manifest)
    try:
        if args.images:
            job = ExtractionJob(
                backbone=args.backbone,
                input_path=args.input,
                output_path=args.out,
                batch_size=args.batch_size,
                normalize=not args.no_normalize,
                source_kind=args.source_kind,
            )
            summary = extract_image_embeddings(job, categories)
            print(f"wrote {args.out}: {summary['images']} rows, {summary['skipped']} skipped")
        else:
            job = ExtractionJob(
                backbone=args.backbone,
                input_path=args.prompts,
                output_path=args.out,
                batch_size=args.batch_size,
            )
            extract_text_embeddings(job, categories)
            print(f"wrote {args.out}: {len(categories)} category rows")
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
