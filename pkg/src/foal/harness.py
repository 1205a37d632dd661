"""One-pass online class-incremental training loop and evaluation protocol.

Each task's training samples are streamed exactly once, in manifest order,
grouped into mini-batches (the final batch may be short). After finishing
task k the classifier is evaluated on the test sets of every task j <= k,
filling row k of the accuracy matrix. No sample is ever revisited and no
buffer is kept; the classifier state is the only thing carried forward.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import classifier as clf
from .encoder import ActivationBatch, EncoderConfig, encode_batch, init_projection
from .errors import FoalError
from .features import read_features
from .manifest import StreamManifest
from .metrics import AccuracyMatrix, average_accuracy, forgetting

EVAL_CHUNK = 512


@dataclass(frozen=True)
class RunConfig:
    """Experiment knobs; the defaults match the reference operating point."""

    gamma: float = 1.0
    projection_dim: int = 1000
    seed: int = 0
    batch_size: int = 10
    fusion_enabled: bool = True
    smooth_projection_enabled: bool = True

    def validate(self) -> None:
        if not self.gamma > 0:
            raise FoalError("gamma must be positive")
        if self.projection_dim < 1:
            raise FoalError("projection dim must be >= 1")
        if self.batch_size < 1:
            raise FoalError("batch size must be >= 1")
        if self.seed < 0:
            raise FoalError("seed must be a non-negative integer")

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "projection_dim": self.projection_dim,
            "seed": self.seed,
            "batch_size": self.batch_size,
            "fusion_enabled": self.fusion_enabled,
            "smooth_projection_enabled": self.smooth_projection_enabled,
        }


@dataclass
class MetricsReport:
    dataset: str
    config: RunConfig
    per_task_accuracy: list          # A_i for i = 1..m
    average_accuracy: float          # mean of the A_i
    last_accuracy: float             # A_m
    per_task_forgetting: list        # F_i for i = 2..m (empty when m = 1)
    final_forgetting: float | None   # F_m, None when m = 1
    weight_norms: list               # (class id, L2 norm) in class order
    samples_per_task: list
    batch_seconds: list = field(default_factory=list)
    batch_diagnostics: list = field(default_factory=list)


def build_encoder_config(manifest: StreamManifest,
                         config: RunConfig) -> EncoderConfig:
    projection = None
    if config.smooth_projection_enabled:
        projection = init_projection(config.seed, manifest.block_dim,
                                     config.projection_dim)
    return EncoderConfig(
        fusion_enabled=config.fusion_enabled,
        smooth_projection_enabled=config.smooth_projection_enabled,
        projection=projection,
    )


def run_experiment(manifest: StreamManifest, config: RunConfig,
                   *, collect_batch_diagnostics: bool = False):
    """Train over the manifest's stream.

    Returns (MetricsReport, AccuracyMatrix, final ClassifierState).
    ``collect_batch_diagnostics`` additionally evaluates the current task's
    test set after every batch; it is for inspection only and never part of
    the canonical results serialization.
    """
    config.validate()
    encoder = build_encoder_config(manifest, config)
    state = clf.new_classifier(encoder.effective_dim(manifest.block_dim),
                               config.gamma)

    acc = AccuracyMatrix(manifest.num_tasks)
    batch_seconds = []
    samples_per_task = []
    diagnostics = []

    for task in manifest.tasks:
        consumed = 0
        batch_index = 0
        for X, Y in _batched_stream(task, manifest, encoder, config.batch_size):
            started = time.perf_counter()
            state = clf.update(state, X, Y)
            batch_seconds.append(time.perf_counter() - started)
            consumed += len(X)
            batch_index += 1
            if collect_batch_diagnostics:
                diagnostics.append({
                    "task": task.index,
                    "batch": batch_index,
                    "samples_seen": state.samples_seen,
                    "task_test_accuracy": _evaluate_file(state, task.test,
                                                         encoder),
                })
        samples_per_task.append(consumed)
        if state.samples_seen != sum(samples_per_task):
            raise FoalError("sample accounting drifted; one-pass guarantee broken")

        for j in range(1, task.index + 1):
            accuracy = _evaluate_file(state, manifest.tasks[j - 1].test,
                                      encoder)
            acc.set(task.index, j, accuracy)

    m = manifest.num_tasks
    per_task_acc = [average_accuracy(acc, i) for i in range(1, m + 1)]
    per_task_forg = [forgetting(acc, i)[0] for i in range(2, m + 1)]
    report = MetricsReport(
        dataset=manifest.dataset,
        config=config,
        per_task_accuracy=per_task_acc,
        average_accuracy=float(np.mean(per_task_acc)),
        last_accuracy=per_task_acc[-1],
        per_task_forgetting=per_task_forg,
        final_forgetting=per_task_forg[-1] if per_task_forg else None,
        weight_norms=clf.weight_column_norms(state),
        samples_per_task=samples_per_task,
        batch_seconds=batch_seconds,
        batch_diagnostics=diagnostics,
    )
    return report, acc, state


def evaluate(state: clf.ClassifierState, test_features: ActivationBatch,
             test_labels) -> float:
    """Fraction of rows whose predicted class id matches the true id."""
    test_labels = list(test_labels)
    if not test_labels:
        raise FoalError("cannot evaluate on an empty test set")
    if len(test_labels) != len(test_features):
        raise FoalError(
            f"{len(test_features)} test rows vs {len(test_labels)} labels"
        )
    predicted, _ = clf.predict(state, test_features)
    hits = sum(1 for p, t in zip(predicted, test_labels) if p == t)
    return hits / len(test_labels)


def _batched_stream(task, manifest, encoder, batch_size):
    """Yield (ActivationBatch, LabelBatch) groups from a task's train file."""
    allowed = set(task.classes)
    _, stream = read_features(task.train)
    ids, samples = [], []
    for class_id, sample in stream:
        if class_id not in allowed:
            raise FoalError(
                f"train sample of class {class_id} not in task {task.index}'s "
                f"declared classes"
            )
        ids.append(class_id)
        samples.append(sample)
        if len(samples) == batch_size:
            yield encode_batch(samples, encoder), clf.LabelBatch(ids)
            ids, samples = [], []
    if samples:
        yield encode_batch(samples, encoder), clf.LabelBatch(ids)


def _evaluate_file(state, path, encoder) -> float:
    """Stream a test file in chunks; chunking cannot change the result."""
    _, stream = read_features(path)
    hits = total = 0
    ids, samples = [], []

    def flush():
        nonlocal hits, total, ids, samples
        if not samples:
            return
        batch = encode_batch(samples, encoder)
        predicted, _ = clf.predict(state, batch)
        hits += sum(1 for p, t in zip(predicted, ids) if p == t)
        total += len(ids)
        ids, samples = [], []

    for class_id, sample in stream:
        ids.append(class_id)
        samples.append(sample)
        if len(samples) == EVAL_CHUNK:
            flush()
    flush()
    if total == 0:
        raise FoalError(f"test file {path} is empty")
    return hits / total
