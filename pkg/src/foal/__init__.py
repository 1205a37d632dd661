"""Exemplar-free online class-incremental learning.

A frozen encoder (per-block feature fusion plus seeded random projection
with a sigmoid squash) feeds a linear classifier whose weights are kept
equal to the joint ridge solution over everything seen so far, via
recursive least-squares updates on mini-batches. Memory stays O(D^2)
regardless of stream length and no sample is ever stored or revisited.
"""

from .classifier import (
    ClassifierState,
    LabelBatch,
    closed_form,
    expand_classes,
    load_state,
    new_classifier,
    predict,
    save_state,
    update,
    weight_column_norms,
)
from .encoder import (
    ActivationBatch,
    BlockFeatureSet,
    EncoderConfig,
    ProjectionSpec,
    encode_batch,
    fuse_blocks,
    init_projection,
    smooth_project,
)
from .errors import (
    FeatureFileError,
    FoalError,
    ManifestError,
    NotPositiveDefiniteError,
)
from .features import FeatureHeader, read_all, read_features, read_header, write_features
from .harness import MetricsReport, RunConfig, evaluate, run_experiment
from .manifest import StreamManifest, TaskSpec, parse_manifest, write_manifest
from .metrics import AccuracyMatrix, average_accuracy, forgetting
from .results import parse_results, results_to_dict, serialize_results, write_results
from .synthetic import make_synthetic_stream
from .verification import benchmark_updates, run_equivalence_check

__version__ = "0.1.0"

__all__ = [
    "ActivationBatch",
    "AccuracyMatrix",
    "BlockFeatureSet",
    "ClassifierState",
    "EncoderConfig",
    "FeatureFileError",
    "FeatureHeader",
    "FoalError",
    "LabelBatch",
    "ManifestError",
    "MetricsReport",
    "NotPositiveDefiniteError",
    "ProjectionSpec",
    "RunConfig",
    "StreamManifest",
    "TaskSpec",
    "average_accuracy",
    "benchmark_updates",
    "closed_form",
    "encode_batch",
    "evaluate",
    "expand_classes",
    "forgetting",
    "fuse_blocks",
    "init_projection",
    "load_state",
    "make_synthetic_stream",
    "new_classifier",
    "parse_manifest",
    "parse_results",
    "predict",
    "read_all",
    "read_features",
    "read_header",
    "results_to_dict",
    "run_equivalence_check",
    "run_experiment",
    "save_state",
    "serialize_results",
    "smooth_project",
    "update",
    "weight_column_norms",
    "write_features",
    "write_manifest",
    "write_results",
]
