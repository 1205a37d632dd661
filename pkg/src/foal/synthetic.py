"""Synthetic OCIL fixture: separable Gaussian blobs with complementary blocks.

Each class gets one Gaussian mean per block. The feature dimensions are
split into one group per block and a block's class means are nonzero only
inside its own group, so the blocks carry complementary pieces of the class
signal and averaging them strictly adds information. The last block's means
are additionally down-scaled: a pipeline that keeps only the last block
(fusion disabled) sees a much weaker signal, which makes the fusion ablation
visible on this fixture.

Generation is fully determined by the seed (Philox), so two invocations with
equal arguments produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .encoder import BlockFeatureSet
from .features import write_features
from .manifest import StreamManifest, TaskSpec, write_manifest

MEAN_SCALE = 2.0
LAST_BLOCK_MEAN_SCALE = 0.8
NOISE_SCALE = 0.5


def make_synthetic_stream(out_dir, *, tasks: int = 5, classes_per_task: int = 4,
                          samples_per_class: int = 100,
                          test_samples_per_class: int = 50,
                          block_count: int = 4, block_dim: int = 32,
                          seed: int = 0, label_noise: float = 0.0) -> Path:
    """Write feature files plus manifest under out_dir; returns the manifest path.

    ``label_noise`` resamples that fraction of train labels uniformly within
    the task's classes (test labels stay clean); useful for making the ridge
    regularization sweep show its shape.
    """
    if min(tasks, classes_per_task, samples_per_class,
           test_samples_per_class, block_count, block_dim) < 1:
        raise ValueError("all synthetic stream parameters must be >= 1")
    if not 0.0 <= label_noise <= 1.0:
        raise ValueError("label_noise must be in [0, 1]")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.Generator(np.random.Philox(key=seed))
    num_classes = tasks * classes_per_task
    means = _class_means(rng, num_classes, block_count, block_dim)

    task_specs = []
    for k in range(1, tasks + 1):
        class_ids = list(range((k - 1) * classes_per_task, k * classes_per_task))
        train = _draw_split(rng, means, class_ids, samples_per_class,
                            block_count, block_dim, shuffle=True)
        if label_noise > 0.0:
            train = _corrupt_labels(rng, train, class_ids, label_noise)
        test = _draw_split(rng, means, class_ids, test_samples_per_class,
                           block_count, block_dim, shuffle=False)
        train_path = out_dir / f"task{k:02d}_train.foal"
        test_path = out_dir / f"task{k:02d}_test.foal"
        write_features(train, train_path)
        write_features(test, test_path)
        task_specs.append(TaskSpec(index=k, classes=tuple(class_ids),
                                   train=train_path, test=test_path))

    manifest = StreamManifest(
        dataset="synthetic-blobs",
        block_count=block_count,
        block_dim=block_dim,
        tasks=tuple(task_specs),
        metadata={
            "generator": "complementary-gaussian-blobs",
            "seed": str(seed),
            "samples_per_class": str(samples_per_class),
            "test_samples_per_class": str(test_samples_per_class),
            "label_noise": str(label_noise),
        },
    )
    manifest_path = out_dir / "manifest.json"
    write_manifest(manifest, manifest_path)
    return manifest_path


def _class_means(rng, num_classes, block_count, block_dim):
    """means[c][b]: signal only in block b's dimension group, weak last block."""
    groups = np.array_split(np.arange(block_dim), block_count)
    means = np.zeros((num_classes, block_count, block_dim))
    for c in range(num_classes):
        for b in range(block_count):
            scale = LAST_BLOCK_MEAN_SCALE if b == block_count - 1 else MEAN_SCALE
            means[c, b, groups[b]] = rng.normal(0.0, scale, size=len(groups[b]))
    return means


def _draw_split(rng, means, class_ids, per_class, block_count, block_dim,
                *, shuffle):
    samples = []
    for cid in class_ids:
        for _ in range(per_class):
            blocks = means[cid] + rng.normal(0.0, NOISE_SCALE,
                                             size=(block_count, block_dim))
            samples.append((cid, BlockFeatureSet(blocks.astype(np.float32))))
    if shuffle:
        order = rng.permutation(len(samples))
        samples = [samples[i] for i in order]
    return samples


def _corrupt_labels(rng, samples, class_ids, fraction):
    corrupted = []
    for cid, sample in samples:
        if rng.random() < fraction:
            cid = int(class_ids[rng.integers(0, len(class_ids))])
        corrupted.append((cid, sample))
    return corrupted
