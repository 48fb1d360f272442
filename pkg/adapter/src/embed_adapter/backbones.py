"""Encoder backbones behind a tiny common interface.

The deterministic hash backbones ("hash-64", "hash-512") derive a pseudo
embedding from the sha256 of the payload; they need no model weights, run
anywhere, and make extraction byte-reproducible, which is what the tests
exercise. Real vision-language encoders plug in through the same
interface; "clip-vit-b32" is wired to open_clip and raises a clear error
when torch/open_clip are not installed.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MissingDependencyError


@dataclass(frozen=True)
class Backbone:
    name: str
    width: int
    encode_image_bytes: Callable[[bytes], np.ndarray]
    encode_text: Callable[[str], np.ndarray]


def _hash_vector(payload: bytes, width: int) -> np.ndarray:
    digest = hashlib.sha256(payload).digest()
    seed = int.from_bytes(digest[:8], "little")
    rng = np.random.default_rng(seed)
    return rng.standard_normal(width).astype(np.float32)


def _hash_backbone(name: str, width: int) -> Backbone:
    return Backbone(
        name=name,
        width=width,
        encode_image_bytes=lambda data: _hash_vector(b"img:" + data, width),
        encode_text=lambda text: _hash_vector(b"txt:" + text.encode("utf-8"), width),
    )


def _clip_backbone(name: str) -> Backbone:
    try:
        import open_clip  # noqa: F401
        import torch  # noqa: F401
    except ImportError as exc:
        raise MissingDependencyError(
            f"backbone {name!r} needs torch and open_clip installed "
            f"(pip install torch open-clip-torch); falling back to a hash-* "
            f"backbone keeps extraction fully offline"
        ) from exc
    import io

    from PIL import Image

    model, _, preprocess = open_clip.create_model_and_transforms(
        "ViT-B-32", pretrained="openai"
    )
    tokenizer = open_clip.get_tokenizer("ViT-B-32")
    model.eval()

    def encode_image_bytes(data: bytes) -> np.ndarray:
        with torch.no_grad():
            image = preprocess(Image.open(io.BytesIO(data)).convert("RGB")).unsqueeze(0)
            return model.encode_image(image)[0].float().numpy()

    def encode_text(text: str) -> np.ndarray:
        with torch.no_grad():
            tokens = tokenizer([text])
            return model.encode_text(tokens)[0].float().numpy()

    return Backbone(
        name=name,
        width=512,
        encode_image_bytes=encode_image_bytes,
        encode_text=encode_text,
    )


_REGISTRY: dict[str, Callable[[], Backbone]] = {
    "hash-64": lambda: _hash_backbone("hash-64", 64),
    "hash-512": lambda: _hash_backbone("hash-512", 512),
    "clip-vit-b32": lambda: _clip_backbone("clip-vit-b32"),
}


def available_backbones() -> list[str]:
    return sorted(_REGISTRY)


def get_backbone(name: str) -> Backbone:
    if name not in _REGISTRY:
        raise MissingDependencyError(
            f"unknown backbone {name!r}; available: {available_backbones()}"
        )
    return _REGISTRY[name]()
