"""Per-block backbone feature extraction into FOAL feature files."""

from .backbone import Backbone, StubBackbone, load_backbone
from .errors import ExtractorError
from .extract import ExtractionJob, run_extraction
from .formats import FeatureFileWriter, write_manifest
from .partition import partition_classes

__version__ = "0.1.0"

__all__ = [
    "Backbone",
    "ExtractionJob",
    "ExtractorError",
    "FeatureFileWriter",
    "StubBackbone",
    "load_backbone",
    "partition_classes",
    "run_extraction",
    "write_manifest",
]
