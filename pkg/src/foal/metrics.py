"""Accuracy and forgetting metrics over a lower-triangular accuracy matrix.

Entry (i, j) holds the accuracy on the test set of task j measured after
training through task i, with 1-based task indices and j <= i. Average
accuracy at task i is the mean of row i. The forgetting of task j at task i
is the best accuracy ever reached on j before i minus the current accuracy;
it is kept signed, so improving on an old task yields negative forgetting.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import FoalError


class AccuracyMatrix:
    """m x m lower-triangular accuracy values, NaN where unset."""

    def __init__(self, num_tasks: int):
        if num_tasks < 1:
            raise FoalError("accuracy matrix needs at least one task")
        self.num_tasks = num_tasks
        self.values = np.full((num_tasks, num_tasks), np.nan)

    def set(self, i: int, j: int, accuracy: float) -> None:
        self._check_indices(i, j)
        if not 0.0 <= accuracy <= 1.0:
            raise FoalError(f"accuracy {accuracy} outside [0, 1]")
        self.values[i - 1, j - 1] = accuracy

    def get(self, i: int, j: int) -> float:
        self._check_indices(i, j)
        value = self.values[i - 1, j - 1]
        if math.isnan(value):
            raise FoalError(f"entry ({i}, {j}) not populated")
        return float(value)

    def row(self, i: int) -> np.ndarray:
        """Entries a(i, 1..i); raises if any is unpopulated."""
        if not 1 <= i <= self.num_tasks:
            raise FoalError(f"task index {i} outside 1..{self.num_tasks}")
        row = self.values[i - 1, :i]
        if np.isnan(row).any():
            raise FoalError(f"row {i} not fully populated")
        return row.copy()

    def to_lists(self):
        return [self.row(i).tolist() for i in range(1, self.num_tasks + 1)]

    @classmethod
    def from_lists(cls, rows) -> "AccuracyMatrix":
        matrix = cls(len(rows))
        for i, row in enumerate(rows, start=1):
            if len(row) != i:
                raise FoalError(f"row {i} must have {i} entries, got {len(row)}")
            for j, value in enumerate(row, start=1):
                matrix.set(i, j, float(value))
        return matrix

    def _check_indices(self, i: int, j: int) -> None:
        if not 1 <= i <= self.num_tasks:
            raise FoalError(f"task index {i} outside 1..{self.num_tasks}")
        if not 1 <= j <= i:
            raise FoalError(f"column {j} outside lower triangle of row {i}")


def average_accuracy(acc: AccuracyMatrix, i: int) -> float:
    """Mean accuracy over the test sets of tasks 1..i after training task i."""
    return float(acc.row(i).mean())


def forgetting(acc: AccuracyMatrix, i: int):
    """Forgetting at task i: per-task drops and their mean, both signed.

    The drop for task j is max over l in j..i-1 of a(l, j), minus a(i, j);
    entries above the diagonal do not exist, so the max starts at l = j.
    Returns (F_i, [f_{i,1}, ..., f_{i,i-1}]). Requires i >= 2.
    """
    if i < 2:
        raise FoalError("forgetting is defined only for task index >= 2")
    acc.row(i)  # ensure populated
    drops = []
    for j in range(1, i):
        best = max(acc.get(l, j) for l in range(j, i))
        drops.append(best - acc.get(i, j))
    return float(np.mean(drops)), drops
