"""Results document: JSON serialization of a finished run.

The document bundles the metrics report, the full accuracy matrix, and an
echo of the run configuration. Serialization is canonical and deterministic:
floats are written with Python's shortest round-trip representation (at most
17 significant digits), so parse(serialize(doc)) reproduces the document
exactly. Wall-clock timing is opt-in because it would break byte-level
determinism between identical runs.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import FoalError
from .harness import MetricsReport
from .metrics import AccuracyMatrix

SCHEMA_VERSION = 1


def results_to_dict(report: MetricsReport, acc: AccuracyMatrix,
                    *, include_timing: bool = False) -> dict:
    document = {
        "schema_version": SCHEMA_VERSION,
        "dataset": report.dataset,
        "config": report.config.to_dict(),
        "num_tasks": acc.num_tasks,
        "accuracy_matrix": acc.to_lists(),
        "per_task_accuracy": [float(a) for a in report.per_task_accuracy],
        "average_accuracy": float(report.average_accuracy),
        "last_accuracy": float(report.last_accuracy),
        "per_task_forgetting": [float(f) for f in report.per_task_forgetting],
        "final_forgetting": (None if report.final_forgetting is None
                             else float(report.final_forgetting)),
        "weight_norms": [[int(cid), float(norm)]
                         for cid, norm in report.weight_norms],
        "samples_per_task": [int(s) for s in report.samples_per_task],
    }
    if include_timing:
        document["timing"] = {
            "batch_seconds": [float(t) for t in report.batch_seconds],
        }
    return document


def serialize_results(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_results(document: dict, path) -> None:
    Path(path).write_text(serialize_results(document))


def parse_results(source) -> dict:
    """Load a results document from a path; validates the schema version."""
    text = Path(source).read_text()
    document = json.loads(text)
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FoalError(f"unsupported results schema version {version!r}")
    return document
