"""Experiment configuration, parallel sweeps and the command line."""
from .config import ExperimentConfig, load_config
from .sweep import CSV_COLUMNS, run_sweep

__all__ = ["ExperimentConfig", "load_config", "CSV_COLUMNS", "run_sweep"]
