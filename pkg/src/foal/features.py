"""Reader and writer for the FOAL binary feature file, format version 1.

Layout (all integers little-endian):

    header, 28 bytes
        offset 0   4 bytes  magic, ASCII "FOAL"
        offset 4   u32      format version, currently 1
        offset 8   u32      flags; bit 0 set when samples carry a label
        offset 12  u64      sample count V
        offset 20  u32      block count n
        offset 24  u32      block dim E
    payload, per sample
        u32                 class id            (only when bit 0 of flags set)
        n * E   f32         block-major feature values: all of block 0,
                            then all of block 1, ...

The payload is exactly V * (4 * labeled + 4 * n * E) bytes; nothing follows
it. All feature values must be finite. Reading is streamed one sample at a
time so memory stays bounded by a single sample regardless of V.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .encoder import BlockFeatureSet
from .errors import FeatureFileError

MAGIC = b"FOAL"
FORMAT_VERSION = 1
_FLAG_LABELED = 0x1

_HEADER = struct.Struct("<4sIIQII")
HEADER_SIZE = _HEADER.size
_LABEL = struct.Struct("<I")


@dataclass(frozen=True)
class FeatureHeader:
    sample_count: int
    block_count: int
    block_dim: int
    labeled: bool

    @property
    def sample_bytes(self) -> int:
        return (4 if self.labeled else 0) + 4 * self.block_count * self.block_dim


def write_features(samples, path, *, labeled: bool = True) -> None:
    """Write (class id, BlockFeatureSet) pairs; ids are ignored when unlabeled.

    All samples must share block count and block dim. ``read_features``
    inverts the result bit for bit.
    """
    samples = list(samples)
    n = e = 0
    if samples:
        n = samples[0][1].block_count
        e = samples[0][1].block_dim
    flags = _FLAG_LABELED if labeled else 0
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, flags,
                                  len(samples), n, e))
            for index, (class_id, sample) in enumerate(samples):
                if sample.block_count != n or sample.block_dim != e:
                    raise FeatureFileError(
                        path,
                        f"sample shape ({sample.block_count}, {sample.block_dim}) "
                        f"does not match ({n}, {e})",
                        sample_index=index,
                    )
                if labeled:
                    cid = int(class_id)
                    if not 0 <= cid < 2 ** 32:
                        raise FeatureFileError(
                            path, f"class id {class_id!r} not a u32",
                            sample_index=index,
                        )
                    fh.write(_LABEL.pack(cid))
                block = np.ascontiguousarray(sample.blocks, dtype="<f4")
                fh.write(block.tobytes())
    except OSError as exc:
        raise FeatureFileError(path, f"write failed: {exc}") from exc


def read_header(path) -> FeatureHeader:
    try:
        with open(path, "rb") as fh:
            raw = fh.read(HEADER_SIZE)
    except OSError as exc:
        raise FeatureFileError(path, f"read failed: {exc}") from exc
    return _parse_header(path, raw)


def _parse_header(path, raw: bytes) -> FeatureHeader:
    if len(raw) < HEADER_SIZE:
        raise FeatureFileError(path, "file shorter than header", offset=len(raw))
    magic, version, flags, count, n, e = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FeatureFileError(path, f"bad magic {magic!r}", offset=0)
    if version != FORMAT_VERSION:
        raise FeatureFileError(path, f"unsupported version {version}", offset=4)
    if count > 0 and (n == 0 or e == 0):
        raise FeatureFileError(path, f"invalid block shape ({n}, {e})", offset=20)
    return FeatureHeader(sample_count=count, block_count=n, block_dim=e,
                         labeled=bool(flags & _FLAG_LABELED))


def read_features(path):
    """Open a feature file; returns (header, lazy sample iterator).

    The iterator yields (class id or None, BlockFeatureSet) in file order,
    validating finiteness as it goes, and closes the file when exhausted or
    explicitly ``close()``d.
    """
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise FeatureFileError(path, f"read failed: {exc}") from exc
    try:
        header = _parse_header(path, fh.read(HEADER_SIZE))
    except Exception:
        fh.close()
        raise
    size = os.fstat(fh.fileno()).st_size
    expected = HEADER_SIZE + header.sample_count * header.sample_bytes
    if size != expected:
        short = size < expected
        index = max(0, (size - HEADER_SIZE) // header.sample_bytes) if short else None
        raise_offset = size if short else expected
        fh.close()
        raise FeatureFileError(
            path,
            f"payload is {size - HEADER_SIZE} bytes, expected "
            f"{expected - HEADER_SIZE}",
            offset=raise_offset,
            sample_index=index if short and header.sample_bytes else None,
        )
    return header, _sample_iter(path, fh, header)


def _sample_iter(path, fh, header: FeatureHeader):
    floats = header.block_count * header.block_dim
    try:
        for index in range(header.sample_count):
            class_id = None
            if header.labeled:
                raw = fh.read(4)
                if len(raw) < 4:
                    raise FeatureFileError(path, "truncated mid-sample",
                                           sample_index=index)
                class_id = _LABEL.unpack(raw)[0]
            raw = fh.read(4 * floats)
            if len(raw) < 4 * floats:
                raise FeatureFileError(path, "truncated mid-sample",
                                       sample_index=index)
            values = np.frombuffer(raw, dtype="<f4").reshape(
                header.block_count, header.block_dim)
            if not np.isfinite(values).all():
                raise FeatureFileError(path, "non-finite feature value",
                                       sample_index=index)
            yield class_id, BlockFeatureSet(values.copy())
    finally:
        fh.close()


def read_all(path):
    """Materialize a whole file as (header, [(class id, BlockFeatureSet), ...])."""
    header, stream = read_features(path)
    return header, list(stream)
