"""Frozen feature encoder: block fusion followed by smooth random projection.

The encoder is stateless once built. Fusion averages the per-block feature
vectors of a sample into one vector; smooth projection multiplies that vector
by a frozen random matrix and squashes the result through a sigmoid, so every
activation entry lies strictly inside (0, 1). Both stages can be toggled off
for ablations: fusion off keeps only the last block's vector, projection off
passes the fused vector through untouched.

Activations are stored in 32-bit floats (the on-disk precision); fusion and
projection sums accumulate in 64-bit so that even extreme finite inputs
cannot overflow, then round to 32-bit. The classifier promotes to 64-bit.

Projection weights are reproducible from the seed alone: they are drawn from
the standard normal distribution with NumPy's counter-based Philox (4x64)
bit generator, ``standard_normal`` in float32, row-major shape
``(input_dim, output_dim)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import FoalError

# Clamp bounds keeping sigmoid outputs strictly inside (0, 1) in float32.
_SIG_LO = np.float32(np.finfo(np.float32).tiny)
_SIG_HI = np.float32(1.0) - np.float32(np.finfo(np.float32).epsneg)


class BlockFeatureSet:
    """Per-block feature vectors of a single sample, stacked as (n, E) float32."""

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        if isinstance(blocks, np.ndarray) and blocks.ndim == 2:
            stacked = np.asarray(blocks, dtype=np.float32)
        else:
            vectors = [np.asarray(b, dtype=np.float32).reshape(-1) for b in blocks]
            if not vectors:
                raise FoalError("a sample needs at least one block")
            width = vectors[0].shape[0]
            for idx, vec in enumerate(vectors):
                if vec.shape[0] != width:
                    raise FoalError(
                        f"block {idx} has length {vec.shape[0]}, expected {width}"
                    )
            stacked = np.stack(vectors)
        if stacked.shape[0] < 1 or stacked.shape[1] < 1:
            raise FoalError("a sample needs at least one block of positive length")
        if not np.isfinite(stacked).all():
            raise FoalError("block features contain NaN or Inf")
        self.blocks = stacked

    @property
    def block_count(self) -> int:
        return self.blocks.shape[0]

    @property
    def block_dim(self) -> int:
        return self.blocks.shape[1]


@dataclass(frozen=True)
class ProjectionSpec:
    """Frozen random projection: (seed, input_dim, output_dim) determine weights."""

    seed: int
    input_dim: int
    output_dim: int
    weights: np.ndarray  # (input_dim, output_dim) float32, read-only


@dataclass(frozen=True)
class EncoderConfig:
    fusion_enabled: bool = True
    smooth_projection_enabled: bool = True
    projection: ProjectionSpec | None = None

    def __post_init__(self):
        if self.smooth_projection_enabled and self.projection is None:
            raise FoalError("smooth projection enabled but no projection given")

    def effective_dim(self, block_dim: int) -> int:
        if self.smooth_projection_enabled:
            return self.projection.output_dim
        return block_dim


class ActivationBatch:
    """S x D_eff activation rows, one per sample, finite float32."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = np.asarray(rows, dtype=np.float32)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise FoalError("activation batch must be a 2-D array with >= 1 row")
        if not np.isfinite(rows).all():
            raise FoalError("activation batch contains NaN or Inf")
        self.rows = rows

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


def init_projection(seed: int, input_dim: int, output_dim: int) -> ProjectionSpec:
    """Draw a frozen (input_dim, output_dim) standard-normal projection matrix.

    Deterministic: equal arguments reproduce the matrix bit for bit (Philox
    counter-based generator keyed by ``seed``).
    """
    if input_dim < 1 or output_dim < 1:
        raise FoalError("projection dimensions must be positive")
    if seed < 0:
        raise FoalError("projection seed must be a non-negative integer")
    rng = np.random.Generator(np.random.Philox(key=seed))
    weights = rng.standard_normal((input_dim, output_dim), dtype=np.float32)
    weights.setflags(write=False)
    return ProjectionSpec(seed=seed, input_dim=input_dim, output_dim=output_dim,
                          weights=weights)


def fuse_blocks(sample: BlockFeatureSet, config: EncoderConfig) -> np.ndarray:
    """Average the per-block vectors; with fusion off, keep the last block.

    The mean cannot exceed the largest block entry, so the float32 result is
    finite whenever the input is.
    """
    if config.fusion_enabled:
        return sample.blocks.mean(axis=0, dtype=np.float64).astype(np.float32)
    return sample.blocks[-1]


def smooth_project(fused: np.ndarray, spec: ProjectionSpec | None,
                   enabled: bool) -> np.ndarray:
    """Project the fused vector and squash with a sigmoid; identity when off.

    Outputs are clamped to the largest float32 interval strictly inside
    (0, 1), so the open-range guarantee holds for every finite input.
    """
    fused = np.asarray(fused, dtype=np.float32)
    if not enabled:
        return fused
    if spec is None:
        raise FoalError("smooth projection enabled but no projection given")
    if fused.shape[0] != spec.input_dim:
        raise FoalError(
            f"fused vector has length {fused.shape[0]}, "
            f"projection expects {spec.input_dim}"
        )
    z = fused.astype(np.float64) @ spec.weights
    out = expit(z).astype(np.float32)
    return np.clip(out, _SIG_LO, _SIG_HI)


def encode_batch(samples, config: EncoderConfig) -> ActivationBatch:
    """Encode samples into activation rows, preserving input order.

    Row i is exactly ``smooth_project(fuse_blocks(samples[i]))``; the batch
    path is the per-sample composition, so batching vs looping is bit-equal.
    """
    samples = list(samples)
    if not samples:
        raise FoalError("cannot encode an empty sample list")
    n, e = samples[0].block_count, samples[0].block_dim
    for idx, sample in enumerate(samples):
        if sample.block_count != n or sample.block_dim != e:
            raise FoalError(
                f"sample {idx} has shape ({sample.block_count}, {sample.block_dim}), "
                f"expected ({n}, {e})"
            )
    sp = config.smooth_projection_enabled
    rows = [smooth_project(fuse_blocks(s, config), config.projection, sp)
            for s in samples]
    return ActivationBatch(np.stack(rows))
