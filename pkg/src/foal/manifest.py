"""Stream manifests: a JSON description of a task/batch stream over feature files.

Schema (manifest-relative file paths are resolved against the manifest's
directory):

    {
      "dataset": "name",
      "block_count": 4,
      "block_dim": 32,
      "metadata": {"any": "string map"},
      "tasks": [
        {"k": 1, "classes": [0, 1], "train": "t1_train.foal",
         "test": "t1_test.foal"},
        ...
      ]
    }

Validation enforces: contiguous task indices 1..m, pairwise-disjoint class
lists, and that every referenced feature file exists with matching
(block_count, block_dim). Each violation raises a ManifestError naming the
failed check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ManifestError
from .features import read_header


@dataclass(frozen=True)
class TaskSpec:
    index: int
    classes: tuple
    train: Path
    test: Path


@dataclass(frozen=True)
class StreamManifest:
    dataset: str
    block_count: int
    block_dim: int
    tasks: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)


def parse_manifest(path) -> StreamManifest:
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except OSError as exc:
        raise ManifestError("io", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError("syntax", f"{path} is not valid JSON: {exc}") from exc
    return validate_manifest(document, base_dir=path.parent)


def validate_manifest(document, base_dir) -> StreamManifest:
    base_dir = Path(base_dir)
    for key in ("dataset", "block_count", "block_dim", "tasks"):
        if key not in document:
            raise ManifestError("schema", f"missing required field {key!r}")
    raw_tasks = document["tasks"]
    if not isinstance(raw_tasks, list) or not raw_tasks:
        raise ManifestError("schema", "tasks must be a non-empty list")
    n = int(document["block_count"])
    e = int(document["block_dim"])
    if n < 1 or e < 1:
        raise ManifestError("schema", f"invalid block shape ({n}, {e})")

    tasks = []
    for entry in raw_tasks:
        for key in ("k", "classes", "train", "test"):
            if key not in entry:
                raise ManifestError("schema", f"task missing field {key!r}")
        tasks.append(TaskSpec(
            index=int(entry["k"]),
            classes=tuple(int(c) for c in entry["classes"]),
            train=base_dir / entry["train"],
            test=base_dir / entry["test"],
        ))

    indices = [t.index for t in tasks]
    if indices != list(range(1, len(tasks) + 1)):
        raise ManifestError(
            "task indices",
            f"task indices must be contiguous 1..{len(tasks)}, got {indices}",
        )

    seen = {}
    for task in tasks:
        if not task.classes:
            raise ManifestError("schema", f"task {task.index} declares no classes")
        if len(set(task.classes)) != len(task.classes):
            raise ManifestError(
                "disjoint classes",
                f"task {task.index} lists a class twice",
            )
        for cid in task.classes:
            if cid in seen:
                raise ManifestError(
                    "disjoint classes",
                    f"class {cid} appears in tasks {seen[cid]} and {task.index}",
                )
            seen[cid] = task.index

    for task in tasks:
        for role, file_path in (("train", task.train), ("test", task.test)):
            if not file_path.exists():
                raise ManifestError(
                    "missing file",
                    f"task {task.index} {role} file {file_path} does not exist",
                )
            header = read_header(file_path)
            if header.block_count != n or header.block_dim != e:
                raise ManifestError(
                    "dimension mismatch",
                    f"{file_path} has shape ({header.block_count}, "
                    f"{header.block_dim}), manifest declares ({n}, {e})",
                )

    metadata = document.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ManifestError("schema", "metadata must be a string map")

    return StreamManifest(
        dataset=str(document["dataset"]),
        block_count=n,
        block_dim=e,
        tasks=tuple(tasks),
        metadata={str(k): str(v) for k, v in metadata.items()},
    )


def write_manifest(manifest: StreamManifest, path) -> None:
    """Serialize a manifest with file paths relative to the output directory."""
    path = Path(path)
    document = {
        "dataset": manifest.dataset,
        "block_count": manifest.block_count,
        "block_dim": manifest.block_dim,
        "metadata": manifest.metadata,
        "tasks": [
            {
                "k": task.index,
                "classes": list(task.classes),
                "train": _relative_to(task.train, path.parent),
                "test": _relative_to(task.test, path.parent),
            }
            for task in manifest.tasks
        ],
    }
    path.write_text(json.dumps(document, indent=2) + "\n")


def _relative_to(file_path: Path, base: Path) -> str:
    try:
        return str(Path(file_path).relative_to(base))
    except ValueError:
        return str(file_path)
