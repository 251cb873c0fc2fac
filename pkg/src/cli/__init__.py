"""Experiment configuration and the command-line front-end."""
from .config import (
    ConfigError,
    ExperimentConfig,
    PresetNetwork,
    PRESETS,
    build_config,
    load_document,
)

__all__ = [
    'ConfigError', 'ExperimentConfig', 'PresetNetwork', 'PRESETS',
    'build_config', 'load_document',
]
