"""Configuration, experiment presets, CSV output and the command line."""

from .config import ExperimentConfig, PRESETS, load_config, parse_config, preset
from .experiment import CSV_HEADER, ResultRow, constants_report, run_experiment, write_csv

__all__ = ["ExperimentConfig", "PRESETS", "load_config", "parse_config", "preset",
           "CSV_HEADER", "ResultRow", "constants_report", "run_experiment", "write_csv"]
