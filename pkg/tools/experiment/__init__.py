"""
Experiment tool: reproducible runs driven by YAML configs.

This package provides functionality to:
- Load experiment configs with includes and packaged presets
- Validate every parameter block and report violations by config path
- Dispatch a run to the phase-noise, PA, array or link modules
- Write CSV/JSON artifacts atomically, followed by a run manifest
"""

from .config import (
    EXPERIMENT_KINDS,
    ExperimentConfig,
    ValidationReport,
    build_plan,
    deep_merge,
    list_presets,
    load_document,
    validate_config,
)
from .output_handler import ArtifactWriter, RunManifest, read_csv_artifact, read_csv_header
from .runner import run_experiment

__all__ = [
    'EXPERIMENT_KINDS', 'ExperimentConfig', 'ValidationReport', 'load_document', 'deep_merge',
    'list_presets', 'build_plan', 'validate_config',
    'RunManifest', 'ArtifactWriter', 'read_csv_artifact', 'read_csv_header', 'run_experiment',
]
