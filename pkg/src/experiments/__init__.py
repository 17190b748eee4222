"""Experiment harness: data files, metrics, cross-validation and rasters."""

from .cv import ResultsTable, build_report, run_cv
from .io import load_csv, save_results, write_dataset
from .metrics import accuracy, auc
from .raster import emit_decision_raster

__all__ = [
    "ResultsTable",
    "accuracy",
    "auc",
    "build_report",
    "emit_decision_raster",
    "load_csv",
    "run_cv",
    "save_results",
    "write_dataset",
]
