"""Extraction pipeline: dataset split -> per-block features -> files + manifest.

Images are processed in dataset index order, per task, in fixed-size
batches; with a frozen backbone (eval mode, no gradients) re-extraction
reproduces identical bytes. Task membership comes from a deterministic
class partition, so running the train and test splits separately still
yields one consistent manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .backbone import TOKEN_CHOICES, Backbone, load_backbone
from .errors import ExtractorError
from .formats import FeatureFileWriter, write_manifest
from .partition import partition_classes

SPLITS = ("train", "test")

DATASETS = ("cifar100", "cifar10")


@dataclass
class ExtractionJob:
    dataset: str
    out_dir: Path
    split: str = "both"                    # train | test | both
    token: str = "cls"                     # cls | mean
    backbone: str = "vit_b_16_imagenet1k"
    tasks: int = 10
    classes_per_task: int | None = None
    order_seed: int | None = None
    data_root: Path = Path("data")
    download: bool = False
    batch_size: int = 64
    device: str = "cpu"

    def validate(self) -> None:
        if self.split not in SPLITS + ("both",):
            raise ExtractorError(f"split must be train, test or both, "
                                 f"got {self.split!r}")
        if self.token not in TOKEN_CHOICES:
            raise ExtractorError(f"token must be one of {TOKEN_CHOICES}, "
                                 f"got {self.token!r}")
        if self.tasks < 1 or self.batch_size < 1:
            raise ExtractorError("tasks and batch size must be >= 1")


def load_split(dataset: str, split: str, data_root, download: bool):
    """Load a torchvision dataset split as (image, label) pairs."""
    if dataset not in DATASETS:
        raise ExtractorError(
            f"unknown dataset {dataset!r} (known: {', '.join(DATASETS)})")
    from torchvision import datasets as tvd
    cls = {"cifar100": tvd.CIFAR100, "cifar10": tvd.CIFAR10}[dataset]
    try:
        return cls(str(data_root), train=(split == "train"), download=download)
    except Exception as exc:
        raise ExtractorError(
            f"dataset {dataset!r} ({split}) unavailable under {data_root}; "
            f"rerun with --download on a networked machine or place the "
            f"archives there first: {exc}"
        ) from exc


def _labels_of(dataset) -> list:
    targets = getattr(dataset, "targets", None)
    if targets is not None:
        return [int(t) for t in targets]
    return [int(label) for _, label in dataset]


def run_extraction(job: ExtractionJob, *, backbone: Backbone | None = None,
                   dataset_loader=None, progress=None) -> Path | None:
    """Extract features per the job; returns the manifest path when complete.

    A single-split run only writes that split's files; the manifest appears
    once both splits exist on disk (e.g. after the second run). ``backbone``
    and ``dataset_loader`` are injection points for tests.
    """
    job.validate()
    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if backbone is None:
        backbone = load_backbone(job.backbone, job.device)
    if dataset_loader is None:
        dataset_loader = lambda split: load_split(  # noqa: E731
            job.dataset, split, job.data_root, job.download)

    splits = list(SPLITS) if job.split == "both" else [job.split]
    datasets = {split: dataset_loader(split) for split in splits}
    labels = {split: _labels_of(ds) for split, ds in datasets.items()}

    class_ids = sorted(set().union(*[set(v) for v in labels.values()]))
    task_classes = partition_classes(class_ids, tasks=job.tasks,
                                     classes_per_task=job.classes_per_task,
                                     order_seed=job.order_seed)

    counts = {}
    for split in splits:
        dataset = datasets[split]
        split_labels = labels[split]
        for k, classes in enumerate(task_classes, start=1):
            members = set(classes)
            indices = [i for i, label in enumerate(split_labels)
                       if label in members]
            path = _task_path(out_dir, k, split)
            written = _write_task_file(backbone, dataset, split_labels,
                                       indices, job.token, path,
                                       job.batch_size)
            counts[(split, k)] = written
            if progress:
                progress(f"{split} task {k}/{len(task_classes)}: "
                         f"{written} samples -> {path.name}")

    if not all(_task_path(out_dir, k, split).exists()
               for k in range(1, len(task_classes) + 1) for split in SPLITS):
        return None  # other split still missing; manifest comes later

    metadata = {
        "backbone": backbone.name,
        "token": job.token,
        "preprocessing": getattr(backbone, "preprocessing_id", "unknown"),
        "order_seed": "none" if job.order_seed is None else str(job.order_seed),
        "source_dataset": job.dataset,
    }
    for (split, k), count in sorted(counts.items()):
        metadata[f"{split}_task{k}_count"] = str(count)
    tasks = [
        {
            "k": k,
            "classes": list(classes),
            "train": _task_path(out_dir, k, "train"),
            "test": _task_path(out_dir, k, "test"),
        }
        for k, classes in enumerate(task_classes, start=1)
    ]
    return write_manifest(out_dir / "manifest.json", dataset=job.dataset,
                          block_count=backbone.block_count,
                          block_dim=backbone.block_dim, tasks=tasks,
                          metadata=metadata)


def _task_path(out_dir: Path, k: int, split: str) -> Path:
    return out_dir / f"task{k:02d}_{split}.foal"


def _write_task_file(backbone, dataset, labels, indices, token, path,
                     batch_size) -> int:
    if not indices:
        raise ExtractorError(f"no samples for {path.name}; check the partition")
    with FeatureFileWriter(path, block_count=backbone.block_count,
                           block_dim=backbone.block_dim) as writer:
        for lo in range(0, len(indices), batch_size):
            chunk = indices[lo:lo + batch_size]
            images = torch.stack([backbone.preprocess(dataset[i][0])
                                  for i in chunk])
            features = backbone.block_features(images, token)
            expected = (len(chunk), backbone.block_count, backbone.block_dim)
            if tuple(features.shape) != expected:
                raise ExtractorError(
                    f"backbone produced shape {tuple(features.shape)}, "
                    f"expected {expected}")
            array = features.numpy().astype(np.float32, copy=False)
            for row, index in enumerate(chunk):
                writer.append(labels[index], array[row])
        return writer.count
