"""Operational checks of the recursive updates against the joint solution.

``run_equivalence_check`` streams a random synthetic activation sequence
through the recursive classifier and solves the same stacked data in closed
form; agreement of the two weight matrices (relative Frobenius error) is the
decisive evidence that the recursion loses nothing. ``benchmark_updates``
times repeated updates on fixed-size batches to demonstrate that per-batch
cost does not grow with stream length.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from . import classifier as clf
from .encoder import ActivationBatch

EQUIVALENCE_TOL = 1e-8


@dataclass(frozen=True)
class EquivalenceResult:
    relative_error: float
    tolerance: float
    elapsed_seconds: float
    w_recursive: np.ndarray
    w_closed: np.ndarray
    digest: str

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.tolerance


@dataclass(frozen=True)
class BenchResult:
    batch_seconds: list
    first_decile_median: float
    last_decile_median: float

    @property
    def ratio(self) -> float:
        return self.last_decile_median / self.first_decile_median

    @property
    def passed(self) -> bool:
        return self.last_decile_median <= 2.0 * self.first_decile_median


def synthetic_activation_stream(*, dim, tasks, batches_per_task, batch_size,
                                classes_per_task, seed):
    """Random (activations, labels) mini-batches with task-disjoint classes.

    Activation entries are uniform in (0, 1), the range a sigmoid encoder
    produces. Each task's pool of batches_per_task * batch_size samples is
    drawn in one shot and then split, so the data depends only on the
    per-task total: equal totals under different batch layouts give the
    same samples, partitioned differently. Returns a list of
    (S x dim float array, label list) batches in stream order.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    per_task = batches_per_task * batch_size
    stream = []
    for k in range(tasks):
        class_ids = np.arange(k * classes_per_task, (k + 1) * classes_per_task)
        X_pool = rng.random((per_task, dim))
        label_pool = class_ids[rng.integers(0, classes_per_task,
                                            size=per_task)]
        for b in range(batches_per_task):
            lo, hi = b * batch_size, (b + 1) * batch_size
            stream.append((X_pool[lo:hi], label_pool[lo:hi].tolist()))
    return stream


def stack_stream(stream, class_order):
    """Stack a batch stream into (X_all, one-hot Y_all) for the joint solve."""
    columns = {cid: j for j, cid in enumerate(class_order)}
    X_all = np.vstack([X for X, _ in stream])
    Y_all = np.zeros((X_all.shape[0], len(class_order)))
    row = 0
    for X, labels in stream:
        for label in labels:
            Y_all[row, columns[label]] = 1.0
            row += 1
    return X_all, Y_all


def run_recursive(stream, dim, gamma):
    """Feed the stream through the recursive classifier; returns final state."""
    state = clf.new_classifier(dim, gamma)
    for X, labels in stream:
        state = clf.update(state, ActivationBatch(X.astype(np.float32)),
                           clf.LabelBatch(labels))
    return state


def relative_frobenius_error(A: np.ndarray, B: np.ndarray) -> float:
    denom = np.linalg.norm(B)
    if denom == 0.0:
        return float(np.linalg.norm(A - B))
    return float(np.linalg.norm(A - B) / denom)


def weight_digest(W: np.ndarray) -> str:
    """Hash of the weights quantized at 1e-6, stable across batch partitions."""
    quantized = np.round(np.asarray(W, dtype=np.float64), 6)
    quantized += 0.0  # normalize -0.0 to +0.0 before hashing
    payload = repr(quantized.shape).encode() + quantized.tobytes()
    return hashlib.sha256(payload).hexdigest()


def run_equivalence_check(*, dim=64, tasks=5, batches_per_task=10,
                          batch_size=8, classes_per_task=4, seed=0,
                          gamma=1.0,
                          tolerance=EQUIVALENCE_TOL) -> EquivalenceResult:
    started = time.perf_counter()
    stream = synthetic_activation_stream(
        dim=dim, tasks=tasks, batches_per_task=batches_per_task,
        batch_size=batch_size, classes_per_task=classes_per_task, seed=seed)
    state = run_recursive(stream, dim, gamma)
    # The recursive state encodes activations in float32 (the on-disk
    # precision); the oracle must see the same numbers.
    stream32 = [(X.astype(np.float32).astype(np.float64), labels)
                for X, labels in stream]
    X_all, Y_all = stack_stream(stream32, state.class_ids)
    W_joint = clf.closed_form(X_all, Y_all, gamma)
    error = relative_frobenius_error(state.W, W_joint)
    return EquivalenceResult(
        relative_error=error,
        tolerance=tolerance,
        elapsed_seconds=time.perf_counter() - started,
        w_recursive=state.W,
        w_closed=W_joint,
        digest=weight_digest(state.W),
    )


def benchmark_updates(*, dim=1000, batch_size=10, updates=1000, classes=10,
                      seed=0) -> BenchResult:
    """Median per-update latency of the first vs the last decile of updates."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    state = clf.new_classifier(dim, 1.0)
    times = []
    for _ in range(updates):
        X = ActivationBatch(rng.random((batch_size, dim), dtype=np.float32))
        labels = clf.LabelBatch(rng.integers(0, classes,
                                             size=batch_size).tolist())
        started = time.perf_counter()
        state = clf.update(state, X, labels)
        times.append(time.perf_counter() - started)
    decile = max(1, len(times) // 10)
    return BenchResult(
        batch_seconds=times,
        first_decile_median=float(np.median(times[:decile])),
        last_decile_median=float(np.median(times[-decile:])),
    )
