"""
Searching for inputs of maximal label uncertainty.

With the model fixed and the last layer pinned to the uniform distribution,
the search alternates two exact block minimizations of the adversarial
objective: the activation fixed point for the current input, then the input
itself, which is the gamma_1-weighted mean of the codebook columns.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from loguru import logger
from scipy import special

from ..errors import InvalidArgumentError
from ..numerics.simplex import entropic_columns, normalized_entropy
from .inference import predict
from .model import EonModel, build_a_matrices
from .training import assemble_b_t, solve_gamma_point


@dataclass(frozen=True)
class AdversarialResult:
    """Outcome of one adversarial search."""

    x_adv: np.ndarray
    gammas: List[np.ndarray]
    final_label_entropy: float
    iterations: int
    converged: bool
    objective: List[float] = field(default_factory=list)


def solve_x_given_gamma(gamma1, S: np.ndarray) -> np.ndarray:
    """Input minimizing the adversarial objective for fixed activations: S gamma1."""
    gamma1 = np.asarray(gamma1, dtype=np.float64)
    if gamma1.shape != (S.shape[1],):
        raise InvalidArgumentError(f"gamma1 has shape {gamma1.shape}, expected ({S.shape[1]},)")
    return S @ gamma1


def adversarial_objective(
    model: EonModel,
    A: Sequence[np.ndarray],
    x: np.ndarray,
    gammas: Sequence[np.ndarray],
    w: np.ndarray,
) -> float:
    """
    Adversarial objective of (x, activations, feature weights).

    Input-layer cost, coupling terms and the entropic terms of layers 0..N;
    the pinned last layer carries no entropy term.
    """
    eps = model.hyper.epsilon
    eps_w, _ = model.epsilon0_split()
    value = float(assemble_b_t(x, model.S, w / model.n_train) @ gammas[0])
    for n, a in enumerate(A):
        value += float(gammas[n + 1] @ a @ gammas[n])
    value += eps_w * float(np.sum(special.xlogy(w, w)))
    for n in range(1, model.n_layers + 1):
        if eps[n] > 0:
            value += eps[n] * float(np.sum(special.xlogy(gammas[n - 1], gammas[n - 1])))
    return value


def _label_entropy(label_dist: np.ndarray) -> float:
    if label_dist.size < 2:
        return 0.0
    return normalized_entropy(label_dist, label_dist.size)


def find_adversarial(
    model: EonModel,
    init_x: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    max_iters: int = 500,
    resolve_gamma0: bool = False,
) -> AdversarialResult:
    """
    Find an input that drives the model towards maximal label uncertainty.

    Args:
        model: Trained model
        init_x: Starting input (mean of the codebook columns when omitted)
        tol: Relative objective change that stops the search
        max_iters: Iteration cap
        resolve_gamma0: Re-solve the feature weights in every iteration
            instead of keeping the trained ones

    Returns:
        AdversarialResult with x_adv = S gamma_1 of the returned activations
    """
    dims = model.layer_dims
    A = build_a_matrices(model)
    eps_gamma = model.hyper.gamma_epsilon
    eps_w, _ = model.epsilon0_split()
    x = model.S.mean(axis=1) if init_x is None else np.asarray(init_x, dtype=np.float64).copy()
    if x.shape != (dims[0],) or not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"init_x must be a finite vector of length {dims[0]}")

    w = model.feature_weights()
    target = np.full(dims[-1], 1.0 / dims[-1])
    gammas = [np.full(k, 1.0 / k) for k in dims[1:-1]] + [target]
    previous = adversarial_objective(model, A, x, gammas, w)
    history = [previous]
    converged = False
    iterations = 0

    for it in range(1, max_iters + 1):
        iterations = it
        b = assemble_b_t(x, model.S, w / model.n_train)
        gammas, _, _, _ = solve_gamma_point(
            b, A, eps_gamma, target, gammas, model.hyper.max_gamma_iters, model.hyper.gamma_tolerance
        )
        if resolve_gamma0:
            distances = ((x[:, None] - model.S) ** 2) @ gammas[0]
            w = entropic_columns((distances / model.n_train)[:, None], eps_w, layer=0)[:, 0]
        x = solve_x_given_gamma(gammas[0], model.S)
        current = adversarial_objective(model, A, x, gammas, w)
        history.append(current)
        if current > previous + 1e-10:
            logger.warning(f"Adversarial objective increased by {current - previous:.3g} at iteration {it}")
        if abs(previous - current) < tol * max(1.0, abs(current)):
            converged = True
            break
        previous = current

    label_dist = predict(model, x).label_dist
    return AdversarialResult(
        x_adv=x,
        gammas=[np.array(g) for g in gammas],
        final_label_entropy=_label_entropy(label_dist),
        iterations=iterations,
        converged=converged,
        objective=history,
    )


def find_adversarial_batch(
    model: EonModel,
    inits: Sequence[np.ndarray],
    threads: int = 1,
    **kwargs,
) -> List[AdversarialResult]:
    """Independent searches from several starting inputs, in input order."""
    if threads > 1 and len(inits) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda x0: find_adversarial(model, x0, **kwargs), inits))
    return [find_adversarial(model, x0, **kwargs) for x0 in inits]
