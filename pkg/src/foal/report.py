"""Render a results document into CSV tables and matplotlib figures.

Produces, inside the output directory:

    metrics.csv            per-task average accuracy and forgetting
    accuracy_matrix.csv    the lower-triangular accuracy matrix
    weight_norms.csv       per-class weight column norms
    accuracy.png           average and per-task accuracy over the stream
    forgetting.png         forgetting rate per task (when >= 2 tasks)
    accuracy_matrix.png    heatmap of the accuracy matrix
    weight_norms.png       per-class norm bars (recency-bias diagnostic)
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_report(document: dict, out_dir) -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    written += _write_tables(document, out_dir)
    written += _draw_figures(document, out_dir)
    return written


def _write_tables(document: dict, out_dir: Path) -> list:
    paths = []

    metrics_path = out_dir / "metrics.csv"
    with open(metrics_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "average_accuracy", "forgetting"])
        forgetting = document["per_task_forgetting"]
        for i, acc in enumerate(document["per_task_accuracy"], start=1):
            f = "" if i == 1 else forgetting[i - 2]
            writer.writerow([i, acc, f])
    paths.append(metrics_path)

    matrix_path = out_dir / "accuracy_matrix.csv"
    with open(matrix_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        m = document["num_tasks"]
        writer.writerow(["trained_through"] + [f"test_task_{j}"
                                               for j in range(1, m + 1)])
        for i, row in enumerate(document["accuracy_matrix"], start=1):
            writer.writerow([i] + list(row) + [""] * (m - i))
    paths.append(matrix_path)

    norms_path = out_dir / "weight_norms.csv"
    with open(norms_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class_id", "weight_norm"])
        writer.writerows(document["weight_norms"])
    paths.append(norms_path)

    return paths


def _draw_figures(document: dict, out_dir: Path) -> list:
    paths = []
    m = document["num_tasks"]
    tasks = np.arange(1, m + 1)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(tasks, document["per_task_accuracy"], "o-",
            label="average accuracy $A_i$")
    current = [row[-1] for row in document["accuracy_matrix"]]
    ax.plot(tasks, current, "s--", label="current-task accuracy")
    ax.set_xlabel("task")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.set_xticks(tasks)
    ax.legend()
    ax.set_title(f"{document['dataset']}: accuracy over the stream")
    fig.tight_layout()
    path = out_dir / "accuracy.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    if m >= 2:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(tasks[1:], document["per_task_forgetting"], "o-")
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.set_xlabel("task")
        ax.set_ylabel("forgetting $F_i$")
        ax.set_xticks(tasks[1:])
        ax.set_title(f"{document['dataset']}: forgetting")
        fig.tight_layout()
        path = out_dir / "forgetting.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)

    matrix = np.full((m, m), np.nan)
    for i, row in enumerate(document["accuracy_matrix"]):
        matrix[i, :len(row)] = row
    fig, ax = plt.subplots(figsize=(5, 4.5))
    image = ax.imshow(matrix, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xlabel("test task")
    ax.set_ylabel("trained through task")
    ax.set_xticks(range(m), [str(t) for t in tasks])
    ax.set_yticks(range(m), [str(t) for t in tasks])
    fig.colorbar(image, ax=ax, label="accuracy")
    ax.set_title(f"{document['dataset']}: accuracy matrix")
    fig.tight_layout()
    path = out_dir / "accuracy_matrix.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    norms = document["weight_norms"]
    fig, ax = plt.subplots(figsize=(max(6, 0.25 * len(norms)), 4))
    ax.bar(range(len(norms)), [n for _, n in norms])
    mean_norm = float(np.mean([n for _, n in norms])) if norms else 0.0
    ax.axhline(mean_norm, color="crimson", lw=1.0, ls="--", label="mean")
    ax.set_xticks(range(len(norms)),
                  [str(cid) for cid, _ in norms], rotation=90, fontsize=7)
    ax.set_xlabel("class id (in arrival order)")
    ax.set_ylabel("weight column L2 norm")
    ax.legend()
    ax.set_title(f"{document['dataset']}: per-class weight norms")
    fig.tight_layout()
    path = out_dir / "weight_norms.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    return paths
