"""
Decision-function rasters for plotting.

A raster evaluates a model on a regular grid over two chosen features; the
grid extends 20% beyond the data bounds on each side. Rendering is left to
external tools; this module only emits the numbers.
"""

from typing import Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..errors import InvalidArgumentError
from ..network.inference import RowFailure, predict_batch
from ..network.model import EonModel

FILL_POLICIES = ("uniform-random", "midpoint")
MARGIN = 0.2


def emit_decision_raster(
    model: EonModel,
    dims: Tuple[int, int] = (0, 1),
    resolution: int = 50,
    policy: str = "uniform-random",
    bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    seed: int = 0,
    threads: int = 1,
) -> pd.DataFrame:
    """
    Evaluate label distributions and reliability on a 2-D grid.

    Args:
        model: Trained model
        dims: The two feature indices spanning the grid
        resolution: Grid points per axis
        policy: How the remaining features are filled: "uniform-random"
            draws them per grid point within ``bounds``, "midpoint" uses the
            centre of ``bounds``
        bounds: Per-feature (low, high) of the data; the codebook's range
            when omitted
        seed: Seed for the random fill
        threads: Worker threads for prediction

    Returns:
        DataFrame with ``resolution**2`` rows: the two grid coordinates,
        ``pi0..`` and ``reliability``
    """
    K0 = model.layer_dims[0]
    i, j = dims
    if i == j or not (0 <= i < K0 and 0 <= j < K0):
        raise InvalidArgumentError(f"invalid raster dims {dims} for {K0} features")
    if resolution < 2:
        raise InvalidArgumentError(f"resolution must be >= 2, got {resolution}")
    if policy not in FILL_POLICIES:
        raise InvalidArgumentError(f"unknown fill policy '{policy}'; use one of {FILL_POLICIES}")

    lo, hi = bounds if bounds is not None else (model.S.min(axis=1), model.S.max(axis=1))
    lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
    span = np.where(hi > lo, hi - lo, 1.0)
    axis_i = np.linspace(lo[i] - MARGIN * span[i], hi[i] + MARGIN * span[i], resolution)
    axis_j = np.linspace(lo[j] - MARGIN * span[j], hi[j] + MARGIN * span[j], resolution)
    grid_i, grid_j = np.meshgrid(axis_i, axis_j, indexing="ij")

    n = resolution * resolution
    if policy == "uniform-random":
        points = np.random.default_rng(seed).uniform(lo, hi, size=(n, K0))
    else:
        points = np.tile((lo + hi) / 2.0, (n, 1))
    points[:, i] = grid_i.ravel()
    points[:, j] = grid_j.ravel()

    results = predict_batch(model, points, threads=threads)
    M = model.layer_dims[-1]
    frame = pd.DataFrame({f"x{i}": points[:, i], f"x{j}": points[:, j]})
    label = np.full((n, M), np.nan)
    reliability = np.full(n, np.nan)
    for r, result in enumerate(results):
        if not isinstance(result, RowFailure):
            label[r] = result.label_dist
            reliability[r] = result.reliability
    for m in range(M):
        frame[f"pi{m}"] = label[:, m]
    frame["reliability"] = reliability
    logger.info(f"Raster over features ({i}, {j}) at resolution {resolution}")
    return frame
