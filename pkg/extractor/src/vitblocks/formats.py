"""Writers for the FOAL feature file (version 1) and its stream manifest.

This is an independent implementation of the engine's on-disk interface so
the extractor has no runtime dependency on the engine package. Layout
(little-endian): 28-byte header = magic "FOAL", u32 version 1, u32 flags
(bit 0: labeled), u64 sample count, u32 block count, u32 block dim; then per
sample a u32 class id followed by block_count * block_dim float32 values in
block-major order. The engine's test suite pins this layout with a golden
file; files produced here must parse there bit for bit.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ExtractorError

MAGIC = b"FOAL"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIQII")
_LABEL = struct.Struct("<I")


class FeatureFileWriter:
    """Streams labeled samples into one feature file; count is backpatched.

    Usage:
        with FeatureFileWriter(path, block_count=12, block_dim=768) as w:
            w.append(class_id, blocks)   # blocks: (12, 768) float array
    """

    def __init__(self, path, *, block_count: int, block_dim: int):
        if block_count < 1 or block_dim < 1:
            raise ExtractorError(
                f"invalid block shape ({block_count}, {block_dim})")
        self.path = Path(path)
        self.block_count = block_count
        self.block_dim = block_dim
        self.count = 0
        self._fh = open(self.path, "wb")
        self._fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, 0x1, 0,
                                    block_count, block_dim))

    def append(self, class_id: int, blocks) -> None:
        blocks = np.ascontiguousarray(blocks, dtype="<f4")
        if blocks.shape != (self.block_count, self.block_dim):
            raise ExtractorError(
                f"{self.path}: sample {self.count} has shape {blocks.shape}, "
                f"expected ({self.block_count}, {self.block_dim})")
        if not np.isfinite(blocks).all():
            raise ExtractorError(
                f"{self.path}: sample {self.count} contains NaN or Inf")
        cid = int(class_id)
        if not 0 <= cid < 2 ** 32:
            raise ExtractorError(f"{self.path}: class id {class_id!r} not a u32")
        self._fh.write(_LABEL.pack(cid))
        self._fh.write(blocks.tobytes())
        self.count += 1

    def close(self) -> None:
        if self._fh.closed:
            return
        self._fh.seek(0)
        self._fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, 0x1, self.count,
                                    self.block_count, self.block_dim))
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
        if exc_type is not None and self.path.exists():
            self.path.unlink()  # never leave a half-written file behind
        return False


def write_manifest(path, *, dataset: str, block_count: int, block_dim: int,
                   tasks, metadata: dict) -> Path:
    """Write the engine-compatible manifest.

    ``tasks`` is a list of dicts with keys k, classes, train, test; file
    paths are stored relative to the manifest's directory.
    """
    path = Path(path)
    base = path.parent

    def rel(p):
        p = Path(p)
        try:
            return str(p.relative_to(base))
        except ValueError:
            return str(p)

    document = {
        "dataset": dataset,
        "block_count": block_count,
        "block_dim": block_dim,
        "metadata": {str(k): str(v) for k, v in metadata.items()},
        "tasks": [
            {
                "k": int(t["k"]),
                "classes": [int(c) for c in t["classes"]],
                "train": rel(t["train"]),
                "test": rel(t["test"]),
            }
            for t in tasks
        ],
    }
    path.write_text(json.dumps(document, indent=2) + "\n")
    return path
