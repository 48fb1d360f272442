"""Writer for the `.gbe` embedding interchange format.

Byte layout (little-endian): magic "GBE1", u32 header length, UTF-8 JSON
header (sorted keys, compact separators) with fields version/n/f/c/dtype/
normalized/source_kind/class_names plus any extra keys, then N i32 labels,
then N*F f32 vectors row-major. This mirrors the consumer-side contract
byte for byte; files are written atomically via a temp-file rename.
"""
from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"GBE1"


def encode_gbe(
    vectors: np.ndarray,
    labels: np.ndarray,
    class_names: list[str],
    normalized: bool,
    source_kind: str,
    extra_header: dict | None = None,
) -> bytes:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype="<i4")
    n, f = vectors.shape
    header = {
        "version": 1,
        "n": int(n),
        "f": int(f),
        "c": len(class_names),
        "dtype": "f32",
        "normalized": bool(normalized),
        "source_kind": source_kind,
        "class_names": list(class_names),
    }
    if extra_header:
        header.update(extra_header)
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    hdr = blob.encode("utf-8")
    return MAGIC + struct.pack("<I", len(hdr)) + hdr + labels.tobytes() + vectors.tobytes()


def write_gbe_atomic(data: bytes, path: str | Path) -> None:
    """Write bytes then rename into place so readers never see a torn file."""
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise
