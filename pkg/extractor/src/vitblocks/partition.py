"""Class-to-task partitioning for incremental streams."""

from __future__ import annotations

import numpy as np

from .errors import ExtractorError


def partition_classes(class_ids, *, tasks: int, classes_per_task=None,
                      order_seed=None):
    """Split classes into `tasks` disjoint groups of equal size.

    With ``classes_per_task`` unset it is inferred as len(class_ids) // tasks.
    When tasks * classes_per_task < len(class_ids), the surplus classes are
    dropped (the convention for datasets whose class count is not divisible).
    ``order_seed`` permutes the class order first (Philox, reproducible);
    without it the natural order is kept.
    """
    class_ids = [int(c) for c in class_ids]
    if len(set(class_ids)) != len(class_ids):
        raise ExtractorError("class ids must be unique")
    if tasks < 1:
        raise ExtractorError("need at least one task")
    if classes_per_task is None:
        classes_per_task = len(class_ids) // tasks
    if classes_per_task < 1:
        raise ExtractorError(
            f"{len(class_ids)} classes cannot fill {tasks} tasks")
    used = tasks * classes_per_task
    if used > len(class_ids):
        raise ExtractorError(
            f"{tasks} tasks x {classes_per_task} classes need {used} classes, "
            f"dataset has {len(class_ids)}")

    order = list(class_ids)
    if order_seed is not None:
        rng = np.random.Generator(np.random.Philox(key=int(order_seed)))
        order = [order[i] for i in rng.permutation(len(order))]
    order = order[:used]
    return [tuple(order[k * classes_per_task:(k + 1) * classes_per_task])
            for k in range(tasks)]
