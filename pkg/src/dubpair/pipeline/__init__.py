"""Pipeline orchestration: config, stage caching, manifest, validation."""

from .config import ConfigError, PipelineConfig, load_config
from .manifest import ManifestRow, validate_manifest
from .run import StageReport, run_pipeline

__all__ = [
    "ConfigError",
    "ManifestRow",
    "PipelineConfig",
    "StageReport",
    "load_config",
    "run_pipeline",
    "validate_manifest",
]
