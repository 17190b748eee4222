"""
Reading and writing datasets, config files, predictions and results.

Datasets are CSV files with a header: feature columns ``x0 .. x{K0-1}`` (empty
cells mark unobserved features) followed by either one integer ``label``
column or probability columns ``pi0 .. pi{M-1}``. Config files use the flat
``KEY=value`` grammar documented in docs/CONFIG_FORMAT.md.
"""

import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from loguru import logger

from ..errors import DataParseError
from ..models import ExperimentConfig, GRID_KEYS, Hyperparameters, ResultsReport, SyntheticSpec
from ..network.dataset import LABEL_ATOL, Dataset
from ..network.inference import Prediction, RowFailure

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"
LIST_KEYS = {"layer_dims", "epsilon", "delta"}
_FEATURE = re.compile(r"^x(\d+)$")
_PROB = re.compile(r"^pi(\d+)$")


# ============================================================================
# DATASETS
# ============================================================================


def _indexed_columns(columns: Sequence[str], pattern: re.Pattern, kind: str) -> List[str]:
    found = sorted((int(m.group(1)), c) for c in columns if (m := pattern.match(c)))
    if [i for i, _ in found] != list(range(len(found))):
        raise DataParseError(f"{kind} columns must be numbered 0..n-1 without gaps", line=1)
    return [c for _, c in found]


def _numeric(frame: pd.DataFrame, columns: List[str], allow_empty: bool) -> np.ndarray:
    values = np.empty((len(frame), len(columns)))
    for j, column in enumerate(columns):
        raw = frame[column].str.strip()
        parsed = pd.to_numeric(raw.replace("", np.nan), errors="coerce")
        bad = parsed.isna() & (raw != "" if allow_empty else True)
        if bad.any():
            row = int(np.argmax(bad.to_numpy()))
            raise DataParseError(f"column '{column}' has non-numeric value '{frame[column].iloc[row]}'", line=row + 2)
        # to_numeric on object columns is not correctly rounded; astype parses each cell exactly
        values[:, j] = raw.replace("", "nan").to_numpy().astype(np.float64)
    if np.isinf(values).any():
        row = int(np.nonzero(np.isinf(values).any(axis=1))[0][0])
        raise DataParseError("infinite value", line=row + 2)
    return values


def load_csv(path: PathLike) -> Dataset:
    """
    Load a dataset CSV.

    Args:
        path: File with header ``x0..`` plus ``label`` or ``pi0..`` columns

    Returns:
        Dataset with X of shape K0 x T

    Raises:
        DataParseError: malformed header, non-numeric cell or invalid label row,
            with the 1-based line number
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataParseError(f"cannot read {path}: {e}") from e

    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    features = _indexed_columns(columns, _FEATURE, "feature")
    probs = _indexed_columns(columns, _PROB, "probability")
    has_label = "label" in columns
    unknown = set(columns) - set(features) - set(probs) - {"label"}
    if not features or unknown or has_label == bool(probs):
        raise DataParseError(
            f"header must hold x0.. columns and exactly one of 'label' or pi0.. (unknown: {sorted(unknown)})",
            line=1,
        )
    if frame.empty:
        raise DataParseError("no data rows", line=2)

    X = _numeric(frame, features, allow_empty=True)
    if has_label:
        labels = _numeric(frame, ["label"], allow_empty=False)[:, 0]
        bad = (labels < 0) | (labels != np.round(labels))
        if bad.any():
            raise DataParseError("label must be a non-negative integer", line=int(np.argmax(bad)) + 2)
        dataset = Dataset.from_labels(X.T, labels.astype(int))
    else:
        pi = _numeric(frame, probs, allow_empty=False)
        sums = pi.sum(axis=1)
        bad = (pi < 0).any(axis=1) | (np.abs(sums - 1.0) > LABEL_ATOL)
        if bad.any():
            row = int(np.argmax(bad))
            raise DataParseError(f"label distribution sums to {sums[row]:.9g}", line=row + 2)
        dataset = Dataset(X=X.T, pi=pi.T)
    logger.info(f"Loaded {dataset.T} points with {dataset.K0} features and {dataset.n_labels} labels from {path}")
    return dataset


def dataset_frame(dataset: Dataset) -> pd.DataFrame:
    """Rows of points; a ``label`` column when every pi column is one-hot."""
    frame = pd.DataFrame(dataset.X.T, columns=[f"x{d}" for d in range(dataset.K0)])
    one_hot = np.all((dataset.pi == 0.0) | (dataset.pi == 1.0))
    if one_hot:
        frame["label"] = dataset.labels
    else:
        for m in range(dataset.n_labels):
            frame[f"pi{m}"] = dataset.pi[m]
    return frame


def write_dataset(dataset: Dataset, path: PathLike) -> None:
    """Write a dataset CSV at full precision."""
    dataset_frame(dataset).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {dataset.T} points to {path}")


# ============================================================================
# CONFIG FILES
# ============================================================================


def read_config(path: PathLike) -> Dict[str, str]:
    """Read a flat KEY=value file; keys are lower-cased."""
    if not Path(path).is_file():
        raise DataParseError(f"config file {path} not found")
    return {k.strip().lower(): (v or "").strip() for k, v in dotenv_values(path).items()}


def _split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def parse_hyperparameters(values: Dict[str, str], **overrides) -> Hyperparameters:
    """Build hyperparameters from config values; unrelated keys are ignored."""
    fields = set(Hyperparameters.model_fields)
    data: Dict[str, object] = {}
    for key, value in values.items():
        if key in fields:
            data[key] = _split_list(value) if key in LIST_KEYS else value
    data.update({k: v for k, v in overrides.items() if v is not None})
    return Hyperparameters(**data)


def parse_synthetic_spec(values: Dict[str, str], prefix: str = "") -> SyntheticSpec:
    """Build a synthetic spec from config values (keys optionally prefixed)."""
    data = {}
    for key, value in values.items():
        if key.startswith(prefix):
            name = key[len(prefix) :]
            upper = name.upper()
            data[upper if upper in ("D", "K", "T") else name] = value
    return SyntheticSpec(**data)


def parse_grid(values: Dict[str, str], prefix: str = "") -> Dict[str, List[str]]:
    """Grid entries ``K=3,4``; keys matched case-insensitively."""
    canonical = {k.lower(): k for k in GRID_KEYS}
    grid = {}
    for key, value in values.items():
        if key.startswith(prefix) and key[len(prefix) :] in canonical:
            grid[canonical[key[len(prefix) :]]] = _split_list(value)
    return grid


def parse_experiment_config(values: Dict[str, str], grid: Optional[Dict[str, List[str]]] = None) -> ExperimentConfig:
    """
    Build an experiment config.

    ``synthetic.*`` keys describe a generated dataset, ``grid.*`` keys the
    hyperparameter grid; a separate grid (from ``--grid``) overrides them.
    """
    fields = set(ExperimentConfig.model_fields) - {"synthetic", "grid"}
    data: Dict[str, object] = {k: v for k, v in values.items() if k in fields}
    if any(k.startswith("synthetic.") for k in values):
        data["synthetic"] = parse_synthetic_spec(values, prefix="synthetic.")
    merged = parse_grid(values, prefix="grid.")
    merged.update(grid or {})
    if merged:
        data["grid"] = merged
    return ExperimentConfig(**data)


# ============================================================================
# OUTPUTS
# ============================================================================


def predictions_frame(results: Sequence[Union[Prediction, RowFailure]], n_labels: int) -> pd.DataFrame:
    """One row per input row: label distribution, reliability, convergence or error."""
    rows = []
    for i, result in enumerate(results):
        row: Dict[str, object] = {"row": i}
        if isinstance(result, RowFailure):
            row.update({f"pi{m}": np.nan for m in range(n_labels)})
            row.update({"reliability": np.nan, "converged": False, "iterations": 0, "error": result.message})
        else:
            row.update({f"pi{m}": float(p) for m, p in enumerate(result.label_dist)})
            row.update(
                {
                    "reliability": result.reliability,
                    "converged": result.converged,
                    "iterations": result.iterations,
                    "error": "",
                }
            )
        rows.append(row)
    return pd.DataFrame(rows)


def save_results(report: ResultsReport, path: PathLike) -> None:
    """
    Write cross-validation results as CSV (all rows) and a JSON report.

    The JSON file sits next to the CSV with a ``.json`` suffix.
    """
    path = Path(path)
    csv_path = path if path.suffix == ".csv" else path.with_suffix(".csv")
    frame = pd.DataFrame([row.model_dump() for row in report.rows])
    frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT)
    csv_path.with_suffix(".json").write_text(report.model_dump_json(indent=2))
    logger.info(f"Wrote {len(report.rows)} result rows to {csv_path} and {csv_path.with_suffix('.json')}")


def load_features(path: PathLike) -> np.ndarray:
    """Feature rows (T x K0) of a CSV; label columns, if any, are ignored."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataParseError(f"cannot read {path}: {e}") from e
    frame.columns = [c.strip() for c in frame.columns]
    features = _indexed_columns(list(frame.columns), _FEATURE, "feature")
    if not features:
        raise DataParseError("no x0.. feature columns", line=1)
    return _numeric(frame, features, allow_empty=True)
