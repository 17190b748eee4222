"""
Applying trained EON models to unlabeled points.

For a new point the last layer is free: the activation fixed point is solved
with no pinning, starting from a forward pass through the layers, and
gamma_{N+1} is the predicted label distribution. The input weights learned in
training additionally give a reliability score measuring how close the point
lies to the codebook.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from ..config import HARD_EPSILON
from ..errors import InvalidArgumentError, NumericalFailureError
from .model import EonModel, build_a_matrices
from .training import assemble_b_t, forward_activations, solve_gamma

TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class Prediction:
    """Label distribution, reliability and activations of one point."""

    label_dist: np.ndarray
    reliability: float
    gammas: List[np.ndarray]
    converged: bool
    iterations: int


@dataclass(frozen=True)
class RowFailure:
    """A batch row that could not be predicted."""

    row: int
    message: str


def _check_point(model: EonModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.layer_dims[0],):
        raise InvalidArgumentError(f"point has shape {x.shape}, expected ({model.layer_dims[0]},)")
    if np.isinf(x).any():
        raise InvalidArgumentError("point contains infinite entries")
    return x


def weighted_distance(model: EonModel, x: np.ndarray, gamma1: np.ndarray) -> float:
    """sum_k gamma1[k] sum_d w[d] (x[d] - S[d, k])^2 over observed features."""
    return float(assemble_b_t(x, model.S, model.feature_weights()) @ gamma1)


def _reliability(model: EonModel, x: np.ndarray, gamma1: np.ndarray) -> float:
    distance = weighted_distance(model, x, gamma1)
    _, eps_s = model.epsilon0_split()
    if eps_s < HARD_EPSILON:
        return 1.0 if distance == 0.0 else float(TINY)
    return float(max(math.exp(-distance / eps_s), TINY))


def _predict_columns(
    model: EonModel,
    A: Sequence[np.ndarray],
    X: np.ndarray,
    init: Optional[Sequence[np.ndarray]] = None,
) -> List[Prediction]:
    M = X.shape[1]
    gamma0_col = model.test_gamma0_column()
    b = np.stack([assemble_b_t(X[:, j], model.S, gamma0_col) for j in range(M)], axis=1)
    if init is None:
        init = forward_activations(b, A, model.hyper.gamma_epsilon)
    solution = solve_gamma(
        b,
        A,
        model.hyper.gamma_epsilon,
        None,
        init,
        model.hyper.max_gamma_iters,
        model.hyper.gamma_tolerance,
    )
    predictions = []
    for j in range(M):
        gammas = [g[:, j].copy() for g in solution.gammas]
        predictions.append(
            Prediction(
                label_dist=gammas[-1],
                reliability=_reliability(model, X[:, j], gammas[0]),
                gammas=gammas,
                converged=bool(solution.converged[j]),
                iterations=int(solution.iterations[j]),
            )
        )
    return predictions


def predict(model: EonModel, x, init: Optional[Sequence[np.ndarray]] = None) -> Prediction:
    """
    Predict the label distribution of one point.

    Args:
        model: Trained model
        x: Feature vector of length K0 (NaN marks an unobserved feature)
        init: Starting activations per layer (a forward pass from the input
            costs when omitted)

    Returns:
        Prediction; ``converged`` is False when the sweep cap was reached
    """
    x = _check_point(model, x)
    A = build_a_matrices(model)
    start = None if init is None else [np.asarray(g, dtype=np.float64)[:, None] for g in init]
    prediction = _predict_columns(model, A, x[:, None], start)[0]
    if not prediction.converged:
        logger.warning(f"Prediction did not converge in {prediction.iterations} sweeps")
    return prediction


def reliability_score(model: EonModel, x, gamma1: Optional[np.ndarray] = None) -> float:
    """
    Input reliability of a point, in (0, 1].

    exp(-sum_k gamma1[k] sum_d w[d] (x[d] - S[d, k])^2 / eps0_s) with w the
    trained feature weights and eps0_s the data-point share of eps0. Equals 1
    at a codebook column and decays with weighted distance to the codebook.
    """
    x = _check_point(model, x)
    if gamma1 is None:
        gamma1 = predict(model, x).gammas[0]
    return _reliability(model, x, np.asarray(gamma1, dtype=np.float64))


def predict_batch(model: EonModel, X, threads: int = 1) -> List[Union[Prediction, RowFailure]]:
    """
    Predict every row of an (n x K0) matrix.

    Rows are solved in contiguous chunks, concurrently when ``threads > 1``.
    Rows that fail (bad values, numerical failure) come back as ``RowFailure``
    and do not stop the batch.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.layer_dims[0]:
        raise InvalidArgumentError(f"rows have {X.shape[1]} features, model expects {model.layer_dims[0]}")
    A = build_a_matrices(model)
    results: List[Union[Prediction, RowFailure, None]] = [None] * X.shape[0]

    valid = []
    for i, row in enumerate(X):
        if np.isinf(row).any():
            results[i] = RowFailure(i, "row contains infinite entries")
        else:
            valid.append(i)

    def run(rows: List[int]) -> List[Union[Prediction, RowFailure]]:
        try:
            return _predict_columns(model, A, X[rows].T)
        except NumericalFailureError:
            out: List[Union[Prediction, RowFailure]] = []
            for i in rows:
                try:
                    out.extend(_predict_columns(model, A, X[[i]].T))
                except NumericalFailureError as e:
                    logger.error(f"Row {i}: {e}")
                    out.append(RowFailure(i, str(e)))
            return out

    n_chunks = max(1, min(threads, len(valid)))
    chunks = [list(c) for c in np.array_split(np.asarray(valid, dtype=int), n_chunks) if len(c)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    for rows, outputs in zip(chunks, parts):
        for i, output in zip(rows, outputs):
            results[i] = output

    failures = sum(isinstance(r, RowFailure) for r in results)
    if failures:
        logger.warning(f"{failures} of {len(results)} rows failed")
    return results
