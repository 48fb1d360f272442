"""Deterministic prompt compiler for the five generation strategies.

A strategy is a base (simple template, dataset-defined template, or
category-enhancement sentences supplied as an external file) plus optional
composable modifiers: restrictive descriptors appended to the positive
prompt, and negative prompts listing sibling categories plus the global
quality constraints. Requesting the standalone restrictive_description or
negative_prompts strategy rides on the defined-template base.

Rendering is a pure function of (manifest, category, strategy, n, seed):
base prompts come first, and when fewer than n exist the remainder is drawn
by seeded sampling with replacement from the photo-style variant pool in
fixtures/augmentations.json.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import (
    IoError,
    MissingResourceError,
    ParseError,
    ValidationError,
)
from .store import DatasetManifest

SIMPLE_TEMPLATE = "a photo of {}"
RESTRICTIVE_SUFFIX = ", ((sharp focus)), ((highly detailed)), ((hires))"
QUALITY_NEGATIVE = "bad shape, misfigured"
DEFAULT_MAX_SIBLINGS = 5


class PromptKind(str, Enum):
    SIMPLE_TEMPLATE = "simple_template"
    DEFINED_TEMPLATE = "defined_template"
    CATEGORY_ENHANCEMENT = "category_enhancement"
    RESTRICTIVE_DESCRIPTION = "restrictive_description"
    NEGATIVE_PROMPTS = "negative_prompts"


_MODIFIER_KINDS = frozenset(
    {PromptKind.RESTRICTIVE_DESCRIPTION, PromptKind.NEGATIVE_PROMPTS}
)


@dataclass(frozen=True)
class PromptStrategy:
    """Base kind plus composable restrictive/negative modifiers."""

    kind: PromptKind
    modifiers: frozenset[PromptKind] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "kind", PromptKind(self.kind))
        object.__setattr__(
            self, "modifiers", frozenset(PromptKind(m) for m in self.modifiers)
        )
        illegal = self.modifiers - _MODIFIER_KINDS
        if illegal:
            raise ValidationError(
                f"only restrictive_description/negative_prompts compose as modifiers, "
                f"got {sorted(m.value for m in illegal)}"
            )

    def normalized(self) -> tuple[PromptKind, frozenset[PromptKind]]:
        """Standalone modifier kinds ride on the defined-template base."""
        if self.kind in _MODIFIER_KINDS:
            return PromptKind.DEFINED_TEMPLATE, self.modifiers | {self.kind}
        return self.kind, self.modifiers


@dataclass(frozen=True)
class PromptRecord:
    positive: str
    negative: str
    category: str
    seed_path: int

    def __post_init__(self):
        if not self.positive:
            raise ValidationError("positive prompt must be non-empty")


@lru_cache(maxsize=1)
def augmentation_variants() -> tuple[str, ...]:
    """Photo-style padding variants; each carries one {} placeholder."""
    blob = (resources.files("embeval") / "fixtures" / "augmentations.json").read_text(
        encoding="utf-8"
    )
    return tuple(json.loads(blob)["variants"])


def ce_examples_path() -> Path:
    """Path of the shipped example sentence file (tab-separated)."""
    return Path(str(resources.files("embeval") / "fixtures" / "ce_examples.tsv"))


def load_ce_sentences(path: str | Path) -> dict[str, list[str]]:
    """Parse a `category<TAB>sentence` file into a category -> sentences map."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    sentences: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if "\t" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'category<TAB>sentence'")
        category, sentence = line.split("\t", 1)
        if not category or not sentence:
            raise ParseError(f"{path}:{lineno}: empty category or sentence")
        sentences.setdefault(category, []).append(sentence)
    return sentences


def negative_prompt_for(
    manifest: DatasetManifest,
    category: str,
    max_siblings: int = DEFAULT_MAX_SIBLINGS,
    seed: int = 0,
) -> str:
    """Up to max_siblings seeded sibling categories plus the quality constraints."""
    if category not in manifest.categories:
        raise ValidationError(f"unknown category {category!r} for dataset {manifest.name!r}")
    if max_siblings < 1:
        raise ValidationError("max_siblings must be positive")
    siblings = [c for c in manifest.categories if c != category]
    if len(siblings) > max_siblings:
        siblings = random.Random(seed).sample(siblings, max_siblings)
    return ", ".join([*siblings, QUALITY_NEGATIVE])


def _base_prompts(
    manifest: DatasetManifest,
    category: str,
    kind: PromptKind,
    ce_sentences: dict[str, list[str]] | None,
    raw_name: bool,
) -> list[str]:
    if kind == PromptKind.SIMPLE_TEMPLATE:
        return [category if raw_name else SIMPLE_TEMPLATE.replace("{}", category)]
    if kind == PromptKind.DEFINED_TEMPLATE:
        return [manifest.defined_template.replace("{}", category)]
    # category enhancement: sentences come from a registered external file
    if ce_sentences is None:
        raise MissingResourceError(
            f"category_enhancement needs a sentence file registered for {manifest.name!r}"
        )
    if category not in ce_sentences:
        raise MissingResourceError(
            f"sentence file has no entry for category {category!r}"
        )
    return list(ce_sentences[category])


def render_prompts(
    manifest: DatasetManifest,
    category: str,
    strategy: PromptStrategy,
    n: int,
    seed: int = 0,
    ce_sentences: dict[str, list[str]] | None = None,
    raw_name: bool = False,
    max_siblings: int = DEFAULT_MAX_SIBLINGS,
) -> list[PromptRecord]:
    """Compile exactly n prompt records for one category."""
    if category not in manifest.categories:
        raise ValidationError(f"unknown category {category!r} for dataset {manifest.name!r}")
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    base_kind, modifiers = strategy.normalized()
    base = _base_prompts(manifest, category, base_kind, ce_sentences, raw_name)

    rng = random.Random(seed)
    variants = augmentation_variants()
    positives = []
    for i in range(n):
        if i < len(base):
            positives.append(base[i])
        else:
            positives.append(rng.choice(variants).replace("{}", category))

    if PromptKind.RESTRICTIVE_DESCRIPTION in modifiers:
        positives = [p + RESTRICTIVE_SUFFIX for p in positives]
    negative = ""
    if PromptKind.NEGATIVE_PROMPTS in modifiers:
        negative = negative_prompt_for(manifest, category, max_siblings, seed)

    return [
        PromptRecord(positive=p, negative=negative, category=category, seed_path=i)
        for i, p in enumerate(positives)
    ]


def records_to_jsonl(records: list[PromptRecord]) -> str:
    """One JSON object per line, deterministic key order."""
    lines = [
        json.dumps(
            {
                "positive": r.positive,
                "negative": r.negative,
                "category": r.category,
                "seed_path": r.seed_path,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        for r in records
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def records_from_jsonl(text: str) -> list[PromptRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            records.append(
                PromptRecord(
                    positive=data["positive"],
                    negative=data.get("negative", ""),
                    category=data["category"],
                    seed_path=int(data.get("seed_path", lineno - 1)),
                )
            )
        except (json.JSONDecodeError, KeyError) as exc:
            raise ParseError(f"line {lineno}: bad prompt record: {exc}") from exc
    return records
