"""
Coordinate-descent training of EON models.

Every outer iteration minimizes the loss exactly over one block of unknowns at
a time:
- activations Gamma (per data point, a backward sweep of softmax updates)
- codebook S (weighted means)
- layer matrices theta (normalized co-occurrence counts on the floored simplex)
- input weights gamma0 (entropic LP in the chosen parameterization)

Because each block update is an exact minimizer, the loss never increases.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy import special
from scipy.cluster import vq

from ..config import HARD_EPSILON
from ..errors import InvalidArgumentError, NumericalFailureError
from ..models import Hyperparameters
from ..numerics.simplex import entropic_columns, floor_columns, spectral_norm
from .dataset import Dataset
from .model import EonModel, Gamma0, compute_a_matrices, split_epsilon0

INIT_STRATEGIES = ("kmeans++", "random-points", "random-uniform")
DEFAULT_INIT_STRATEGY = "kmeans++"
RESTART_SEED_STRIDE = 7919
MONOTONE_SLACK = 1e-10
EMPTY_CLUSTER_MASS = 1e-300


@dataclass
class GammaSolution:
    """Result of the activation fixed-point iteration for a block of points."""

    gammas: List[np.ndarray]
    iterations: np.ndarray
    converged: np.ndarray
    history: Optional[List[np.ndarray]] = None


@dataclass
class FitTrace:
    """Per-outer-iteration diagnostics of a training run."""

    initial_loss: float
    losses: List[float] = field(default_factory=list)
    block_seconds: List[Dict[str, float]] = field(default_factory=list)
    gamma_iterations: List[int] = field(default_factory=list)
    gamma_converged: List[float] = field(default_factory=list)
    contraction: List[Optional[float]] = field(default_factory=list)
    converged: bool = False
    restart: int = 0
    restart_losses: List[float] = field(default_factory=list)

    @property
    def outer_iterations(self) -> int:
        return len(self.losses)

    @property
    def final_loss(self) -> float:
        return self.losses[-1] if self.losses else self.initial_loss

    def is_monotone(self, slack: float = MONOTONE_SLACK) -> bool:
        values = [self.initial_loss] + self.losses
        return all(b <= a + slack for a, b in zip(values, values[1:]))

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for i, loss_value in enumerate(self.losses):
            row = {
                "iteration": i + 1,
                "loss": loss_value,
                "gamma_iterations": self.gamma_iterations[i],
                "gamma_converged": self.gamma_converged[i],
                "contraction": self.contraction[i],
            }
            row.update({f"seconds_{k}": v for k, v in self.block_seconds[i].items()})
            rows.append(row)
        return pd.DataFrame(rows)


# ============================================================================
# INPUT LAYER
# ============================================================================


def assemble_b_t(x_t: np.ndarray, S: np.ndarray, gamma0_col: np.ndarray) -> np.ndarray:
    """
    Input-layer cost of one point.

    b[k] = sum_d gamma0[d] (x[d] - S[d, k])^2; unobserved (NaN) features add nothing.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    weights = np.where(np.isnan(x_t), 0.0, np.asarray(gamma0_col, dtype=np.float64))
    diff = np.nan_to_num(x_t)[:, None] - S
    return (weights[:, None] * diff**2).sum(axis=0)


def assemble_b(X: np.ndarray, S: np.ndarray, gamma0: np.ndarray) -> np.ndarray:
    """Input-layer costs of all points as a K1 x T matrix."""
    observed = ~np.isnan(X)
    weights = np.where(observed, gamma0, 0.0)
    Xf = np.where(observed, X, 0.0)
    b = np.empty((S.shape[1], X.shape[1]))
    for k in range(S.shape[1]):
        b[k] = (weights * (Xf - S[:, k : k + 1]) ** 2).sum(axis=0)
    return b


def assemble_B(X: np.ndarray, S: np.ndarray, gamma1: np.ndarray) -> np.ndarray:
    """B[d, t] = sum_k gamma1[k, t] (X[d, t] - S[d, k])^2, zero where X is unobserved."""
    observed = ~np.isnan(X)
    Xf = np.where(observed, X, 0.0)
    B = np.zeros_like(Xf)
    for k in range(S.shape[1]):
        B += gamma1[k] * (Xf - S[:, k : k + 1]) ** 2
    return np.where(observed, B, 0.0)


# ============================================================================
# LOSS
# ============================================================================


def loss(
    gammas: Sequence[np.ndarray],
    gamma0: Gamma0,
    S: np.ndarray,
    theta: Sequence[np.ndarray],
    X: np.ndarray,
    hyper: Hyperparameters,
) -> float:
    """
    Training loss of an EON.

    Sum over points of the gamma0-weighted squared distances to the codebook,
    minus the delta-weighted log-theta terms between consecutive layers, plus
    eps_n sum gamma log gamma for every activation layer and the gamma0 penalty.

    Args:
        gammas: Activations gamma_1..gamma_{N+1}, each K_n x T
        gamma0: Input-weight payload
        S: Codebook K0 x K1
        theta: Layer matrices theta^(1..N)
        X: Features K0 x T
        hyper: Hyperparameters (dims, epsilon, delta, floor)

    Returns:
        Loss value
    """
    dims = hyper.layer_dims
    K0, T = X.shape
    if len(gammas) != len(dims) - 1 or len(theta) != hyper.n_layers:
        raise InvalidArgumentError("layer count does not match hyperparameters")
    if S.shape != (dims[0], dims[1]) or K0 != dims[0]:
        raise InvalidArgumentError(f"S shape {S.shape} or X shape {X.shape} inconsistent with dims {dims}")
    for n, g in enumerate(gammas, start=1):
        if g.shape != (dims[n], T):
            raise InvalidArgumentError(f"gamma_{n} has shape {g.shape}, expected {(dims[n], T)}")
    for n, t in enumerate(theta, start=1):
        if t.shape != (dims[n], dims[n + 1]):
            raise InvalidArgumentError(f"theta[{n}] has shape {t.shape}, expected {(dims[n], dims[n + 1])}")

    A = compute_a_matrices(theta, hyper.delta, hyper.theta_floor)
    value = float(np.sum(assemble_b(X, S, gamma0.training_matrix(K0, T)) * gammas[0]))
    for n, a in enumerate(A):
        value += float(np.sum(gammas[n + 1] * (a @ gammas[n])))
    for eps, g in zip(hyper.gamma_epsilon, gammas):
        if eps > 0:
            value += eps * float(np.sum(special.xlogy(g, g)))
    return value + gamma0.regularizer(hyper.epsilon[0], K0, T)


# ============================================================================
# BLOCK SOLVERS
# ============================================================================


def solve_s(gammas: Sequence[np.ndarray], gamma0: Gamma0, X: np.ndarray, S_prev: np.ndarray) -> np.ndarray:
    """
    Codebook minimizing the loss for fixed activations and gamma0.

    Column k of S is the mean of X weighted by gamma0[d, t] gamma_1[k, t];
    entries whose total weight is below 1e-300 keep their previous value.
    """
    observed = ~np.isnan(X)
    weights = np.where(observed, gamma0.training_matrix(*X.shape), 0.0)
    Xf = np.where(observed, X, 0.0)
    numerator = (weights * Xf) @ gammas[0].T
    denominator = weights @ gammas[0].T
    empty = denominator < EMPTY_CLUSTER_MASS
    if empty.any():
        logger.debug(f"Keeping {int(empty.sum())} codebook entries without mass")
    return np.where(empty, S_prev, numerator / np.where(empty, 1.0, denominator))


def solve_theta(gammas: Sequence[np.ndarray], floor: float) -> List[np.ndarray]:
    """
    Layer matrices minimizing the loss for fixed activations.

    theta^(n)[k_n, k_{n+1}] is proportional to sum_t gamma_n[k_n, t] gamma_{n+1}[k_{n+1}, t],
    normalized per column subject to every entry staying >= floor.
    Columns without mass are uniform.
    """
    return [floor_columns(gammas[n] @ gammas[n + 1].T, floor) for n in range(len(gammas) - 1)]


def solve_gamma0(
    mode: str,
    B: np.ndarray,
    epsilon0: float,
    current: Gamma0,
    observed: Optional[np.ndarray] = None,
) -> Gamma0:
    """
    Input weights minimizing the loss for fixed S and activations.

    Args:
        mode: gamma0 parameterization
        B: Per-(feature, point) squared distances averaged over gamma_1, K0 x T
        epsilon0: Entropic weight of gamma0
        current: Current payload (the rank-1 sweep starts from its ``s``)
        observed: Mask of observed features; unobserved cells keep weight 0

    Returns:
        Updated payload
    """
    if not epsilon0 > 0:
        raise InvalidArgumentError(f"epsilon0 must be > 0, got {epsilon0}")
    K0, T = B.shape
    eps_w, eps_s = split_epsilon0(epsilon0, K0, T)
    if mode == "fixed-uniform":
        return current
    if mode == "feature-weights":
        w = entropic_columns(B.mean(axis=1)[:, None], eps_w, layer=0)[:, 0]
        return Gamma0(mode, w=w)
    if mode == "rank-1":
        w = entropic_columns((B @ current.s)[:, None], eps_w, layer=0)[:, 0]
        s = entropic_columns((B.T @ w)[:, None], eps_s, layer=0)[:, 0]
        return Gamma0(mode, w=w, s=s)
    if mode == "full-matrix":
        cost = B if observed is None else np.where(observed, B, np.inf)
        flat = entropic_columns(cost.reshape(-1, 1), epsilon0, layer=0)
        return Gamma0(mode, matrix=flat.reshape(K0, T))
    raise InvalidArgumentError(f"unknown gamma0 mode '{mode}'")


# ============================================================================
# ACTIVATION FIXED POINT
# ============================================================================


def _sweep_block(
    b: np.ndarray,
    A: Sequence[np.ndarray],
    epsilon: Sequence[float],
    pinned: Optional[np.ndarray],
    init: Sequence[np.ndarray],
    max_iters: int,
    tol: float,
    record_history: bool,
) -> GammaSolution:
    M = b.shape[1]
    N = len(A)
    layers = [np.array(g, dtype=np.float64, copy=True) for g in init]
    if pinned is not None:
        layers[N] = np.array(pinned, dtype=np.float64, copy=True)
    iterations = np.zeros(M, dtype=int)
    converged = np.zeros(M, dtype=bool)
    active = np.arange(M)
    history = [np.concatenate(layers, axis=0)] if record_history else None

    for it in range(1, max_iters + 1):
        sub = [g[:, active] for g in layers]
        old = [g.copy() for g in sub]
        if pinned is None:
            sub[N] = entropic_columns(A[N - 1] @ sub[N - 1], epsilon[N], layer=N + 1)
        for j in range(N - 1, 0, -1):
            cost = A[j - 1] @ sub[j - 1] + A[j].T @ sub[j + 1]
            sub[j] = entropic_columns(cost, epsilon[j], layer=j + 1)
        sub[0] = entropic_columns(b[:, active] + A[0].T @ sub[1], epsilon[0], layer=1)

        change = np.sqrt(sum(((new - prev) ** 2).sum(axis=0) for new, prev in zip(sub, old)))
        for g, new in zip(layers, sub):
            g[:, active] = new
        iterations[active] = it
        if record_history:
            history.append(np.concatenate(layers, axis=0))
        done = change < tol
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return GammaSolution(gammas=layers, iterations=iterations, converged=converged, history=history)


def solve_gamma(
    b: np.ndarray,
    A: Sequence[np.ndarray],
    epsilon: Sequence[float],
    pinned: Optional[np.ndarray],
    init: Sequence[np.ndarray],
    max_iters: int,
    tol: float,
    threads: int = 1,
    record_history: bool = False,
) -> GammaSolution:
    """
    Activation fixed point for a block of points (one column each).

    Repeats the backward sweep gamma_{N+1} <- softmax(-A_N gamma_N / eps_{N+1}),
    ..., gamma_1 <- softmax(-(b + A_1^T gamma_2) / eps_1) until the Euclidean
    change of a point's stacked activations drops below ``tol``. A pinned last
    layer (training) is never updated. Columns are independent, so with
    ``threads > 1`` they are split into contiguous chunks solved concurrently.

    Args:
        b: Input-layer costs, K1 x M
        A: Coupling matrices A^(1..N)
        epsilon: eps_1..eps_{N+1}
        pinned: Label distributions K_{N+1} x M, or None for a free last layer
        init: Starting activations, one K_n x M array per layer
        max_iters: Sweep cap
        tol: Convergence threshold on the per-point change
        threads: Worker threads
        record_history: Keep the stacked iterates (for diagnostics)

    Returns:
        GammaSolution with per-point iteration counts and convergence flags
    """
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if len(epsilon) != len(A) + 1 or len(init) != len(A) + 1:
        raise InvalidArgumentError("need one epsilon and one starting layer per activation layer")
    M = b.shape[1]
    if threads <= 1 or M < 2 * threads or record_history:
        return _sweep_block(b, A, epsilon, pinned, init, max_iters, tol, record_history)

    bounds = np.linspace(0, M, threads + 1).astype(int)
    chunks = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    def run(chunk: slice) -> GammaSolution:
        return _sweep_block(
            b[:, chunk],
            A,
            epsilon,
            None if pinned is None else pinned[:, chunk],
            [g[:, chunk] for g in init],
            max_iters,
            tol,
            False,
        )

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(run, chunks))
    return GammaSolution(
        gammas=[np.concatenate([p.gammas[n] for p in parts], axis=1) for n in range(len(init))],
        iterations=np.concatenate([p.iterations for p in parts]),
        converged=np.concatenate([p.converged for p in parts]),
    )


def forward_activations(b: np.ndarray, A: Sequence[np.ndarray], epsilon: Sequence[float]) -> List[np.ndarray]:
    """
    Starting activations from a single input-to-output pass.

    gamma_1 minimizes the input cost alone, and every following layer is the
    exact response to the layer before it with the later layers ignored.

    Args:
        b: Input-layer costs, K1 x M
        A: Coupling matrices of the layers to fill (may be fewer than the model has)
        epsilon: Temperatures of gamma_1 .. gamma_{len(A)+1}

    Returns:
        One K_n x M array per layer
    """
    layers = [entropic_columns(b, epsilon[0], layer=1)]
    for n, a in enumerate(A, start=1):
        layers.append(entropic_columns(a @ layers[-1], epsilon[n], layer=n + 1))
    return layers


def solve_gamma_point(
    b_t: np.ndarray,
    A: Sequence[np.ndarray],
    epsilon: Sequence[float],
    pi_t: Optional[np.ndarray],
    init: Optional[Sequence[np.ndarray]],
    max_iters: int,
    tol: float,
    record_history: bool = False,
) -> Tuple[List[np.ndarray], int, bool, Optional[List[np.ndarray]]]:
    """
    Activation fixed point of a single point.

    Args:
        b_t: Input-layer cost vector, length K1
        A: Coupling matrices
        epsilon: eps_1..eps_{N+1}
        pi_t: Label distribution to pin the last layer to, or None
        init: Starting activations (uniform when None)
        max_iters: Sweep cap
        tol: Convergence threshold
        record_history: Also return every stacked iterate

    Returns:
        (activations per layer, iterations, converged flag, history or None)
    """
    dims = [A[0].shape[1]] + [a.shape[0] for a in A]
    if init is None:
        init = [np.full(k, 1.0 / k) for k in dims]
    solution = solve_gamma(
        np.asarray(b_t, dtype=np.float64)[:, None],
        A,
        epsilon,
        None if pi_t is None else np.asarray(pi_t, dtype=np.float64)[:, None],
        [np.asarray(g, dtype=np.float64)[:, None] for g in init],
        max_iters,
        tol,
        record_history=record_history,
    )
    history = None if solution.history is None else [h[:, 0] for h in solution.history]
    return (
        [g[:, 0] for g in solution.gammas],
        int(solution.iterations[0]),
        bool(solution.converged[0]),
        history,
    )


# ============================================================================
# SPECTRAL CONDITIONS
# ============================================================================


def check_uniqueness(epsilon: Sequence[float], A: Sequence[np.ndarray]) -> Tuple[bool, float]:
    """
    Sufficient condition for a unique activation fixed point.

    Holds when min(eps_1..eps_{N+1}) exceeds the largest
    ||A^(n-1)|| + ||A^(n)|| over the layers, with ||A^(0)|| = ||A^(N+1)|| = 0.

    Returns:
        (condition holds, smallest epsilon needed)
    """
    norms = [0.0] + [spectral_norm(a) for a in A] + [0.0]
    threshold = max(norms[n] + norms[n + 1] for n in range(len(norms) - 1))
    return min(epsilon) > threshold, threshold


def _ratio(norm: float, eps: float) -> float:
    if norm == 0.0:
        return 0.0
    return math.inf if eps < HARD_EPSILON else norm / eps


def check_contraction(epsilon: Sequence[float], A: Sequence[np.ndarray], layer_dims: Sequence[int]) -> Tuple[bool, float]:
    """
    Contraction condition of the backward sweep.

    Args:
        epsilon: eps_1..eps_{N+1}
        A: Coupling matrices A^(1..N)
        layer_dims: K0..K_{N+1}

    Returns:
        (L_G + L_H < 1 / L_bsf, contraction constant L_tilde)
    """
    l_bsf = max((k - 1) / k for k in layer_dims[1:])
    norms = [spectral_norm(a) for a in A]
    l_g = max([_ratio(nrm, epsilon[n]) for n, nrm in enumerate(norms)], default=0.0)
    l_h = max([_ratio(nrm, epsilon[n + 1]) for n, nrm in enumerate(norms)], default=0.0)
    if l_bsf == 0.0:
        return True, 0.0
    holds = l_g + l_h < 1.0 / l_bsf
    if l_bsf * l_g >= 1.0 or math.isinf(l_h):
        return holds, math.inf
    return holds, l_bsf * l_h / (1.0 - l_bsf * l_g)


# ============================================================================
# TRAINING LOOP
# ============================================================================


class EonTrainer:
    """
    Coordinate-descent trainer.

    Runs the outer loop Gamma -> S -> theta -> gamma0 until the relative loss
    change drops below the tolerance, with optional restarts from different
    seeds (the lowest final loss wins).
    """

    def __init__(self, hyper: Hyperparameters, init_strategy: str = DEFAULT_INIT_STRATEGY, threads: int = 1):
        """
        Initialize the trainer.

        Args:
            hyper: Hyperparameters
            init_strategy: "kmeans++", "random-points" or "random-uniform" codebook start
            threads: Worker threads for the activation step
        """
        if init_strategy not in INIT_STRATEGIES:
            raise InvalidArgumentError(f"unknown init strategy '{init_strategy}'; use one of {INIT_STRATEGIES}")
        self.hyper = hyper
        self.init_strategy = init_strategy
        self.threads = max(1, threads)

    def _initial_codebook(self, X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        K1 = self.hyper.layer_dims[1]
        K0, T = X.shape
        fill = np.nan_to_num(np.nanmean(X, axis=1), nan=0.5)
        Xf = np.where(np.isnan(X), fill[:, None], X)
        if self.init_strategy == "kmeans++" and len(np.unique(Xf.T, axis=0)) >= K1:
            centers, _ = vq.kmeans2(Xf.T, K1, minit="++", seed=rng)
            return np.array(centers.T, dtype=np.float64)
        if self.init_strategy != "random-uniform":
            idx = rng.choice(T, size=K1, replace=T < K1)
            return Xf[:, idx].copy()
        lo, hi = Xf.min(axis=1), Xf.max(axis=1)
        return rng.uniform(lo, hi, size=(K1, K0)).T

    def _initial_theta(
        self, X: np.ndarray, S: np.ndarray, gamma0: Gamma0, pi: np.ndarray, rng: np.random.Generator
    ) -> List[np.ndarray]:
        """
        Random hidden-to-hidden matrices and a label matrix that agrees with the codebook.

        theta^(1..N-1) are Dirichlet draws. theta^(N) holds the label counts of
        the forward activations, so the first activation step starts from
        clusters the input costs already support.
        """
        hyper = self.hyper
        dims = hyper.layer_dims
        N = hyper.n_layers
        theta = [
            floor_columns(rng.dirichlet(np.ones(dims[n]), size=dims[n + 1]).T, hyper.theta_floor)
            for n in range(1, N)
        ]
        A = compute_a_matrices(theta, hyper.delta[: N - 1], hyper.theta_floor)
        b = assemble_b(X, S, gamma0.training_matrix(*X.shape))
        last_hidden = forward_activations(b, A, hyper.gamma_epsilon[:N])[-1]
        theta.append(floor_columns(last_hidden @ pi.T, hyper.theta_floor))
        return theta

    def _check_dataset(self, dataset: Dataset) -> None:
        dims = self.hyper.layer_dims
        if dataset.K0 != dims[0]:
            raise InvalidArgumentError(f"dataset has {dataset.K0} features, model expects {dims[0]}")
        if dataset.n_labels != dims[-1]:
            raise InvalidArgumentError(f"dataset has {dataset.n_labels} label states, model expects {dims[-1]}")

    def fit_once(self, dataset: Dataset, seed: int) -> Tuple[EonModel, FitTrace]:
        """Train from a single seeded initialization."""
        self._check_dataset(dataset)
        hyper = self.hyper
        dims = hyper.layer_dims
        N = hyper.n_layers
        X, T = dataset.X, dataset.T
        observed = dataset.observed
        eps = hyper.gamma_epsilon
        rng = np.random.default_rng(seed)

        S = self._initial_codebook(X, rng)
        gamma0 = Gamma0.uniform(hyper.gamma0_mode, dims[0], T, observed)
        try:
            theta = self._initial_theta(X, S, gamma0, dataset.pi, rng)
        except NumericalFailureError as e:
            raise e.at_iteration(0) from e
        gammas = [np.full((dims[n], T), 1.0 / dims[n]) for n in range(1, N + 1)] + [np.array(dataset.pi)]

        previous = loss(gammas, gamma0, S, theta, X, hyper)
        trace = FitTrace(initial_loss=previous)
        logger.debug(f"seed {seed}: initial loss {previous:.10g}")

        for it in range(1, hyper.max_outer_iters + 1):
            seconds: Dict[str, float] = {}
            try:
                A = compute_a_matrices(theta, hyper.delta, hyper.theta_floor)

                start = time.perf_counter()
                b = assemble_b(X, S, gamma0.training_matrix(dims[0], T))
                solution = solve_gamma(
                    b, A, eps, dataset.pi, gammas, hyper.max_gamma_iters, hyper.gamma_tolerance, self.threads
                )
                gammas = solution.gammas
                seconds["gamma"] = time.perf_counter() - start

                start = time.perf_counter()
                S = solve_s(gammas, gamma0, X, S)
                seconds["S"] = time.perf_counter() - start

                start = time.perf_counter()
                theta = solve_theta(gammas, hyper.theta_floor)
                seconds["theta"] = time.perf_counter() - start

                start = time.perf_counter()
                B = assemble_B(X, S, gammas[0])
                gamma0 = solve_gamma0(hyper.gamma0_mode, B, hyper.epsilon[0], gamma0, observed)
                seconds["gamma0"] = time.perf_counter() - start
            except NumericalFailureError as e:
                logger.error(f"Numerical failure in outer iteration {it}: {e}")
                raise e.at_iteration(it) from e

            current = loss(gammas, gamma0, S, theta, X, hyper)
            # The hidden subsystem is what the sweep iterates while the last layer is pinned
            _, l_tilde = check_contraction(eps[:N], A[: N - 1], dims[:N + 1])

            trace.losses.append(current)
            trace.block_seconds.append(seconds)
            trace.gamma_iterations.append(int(solution.iterations.max()))
            trace.gamma_converged.append(float(solution.converged.mean()))
            trace.contraction.append(None if math.isinf(l_tilde) else l_tilde)
            logger.debug(f"seed {seed} iteration {it}: loss {current:.12g}")

            if current > previous + MONOTONE_SLACK:
                logger.warning(f"Loss increased by {current - previous:.3g} in iteration {it}")
            if abs(previous - current) < hyper.tolerance * max(1.0, abs(current)):
                trace.converged = True
                break
            previous = current

        if not trace.converged:
            logger.warning(f"seed {seed}: no convergence after {hyper.max_outer_iters} outer iterations")
        model = EonModel(S=S, theta=tuple(theta), gamma0=gamma0, hyper=hyper, n_train=T)
        return model, trace

    def fit(self, dataset: Dataset, restarts: int = 1) -> Tuple[EonModel, FitTrace]:
        """
        Train with ``restarts`` initializations and keep the lowest final loss.

        Args:
            dataset: Training data
            restarts: Number of initializations; seeds are hyper.seed + r * 7919

        Returns:
            Best model and its trace (``restart_losses`` lists every run)
        """
        if restarts < 1:
            raise InvalidArgumentError(f"restarts must be >= 1, got {restarts}")
        logger.info(
            f"Fitting EON {self.hyper.layer_dims} ({self.hyper.gamma0_mode}) on {dataset.T} points, {restarts} restart(s)"
        )
        best: Optional[Tuple[EonModel, FitTrace]] = None
        finals: List[float] = []
        for r in range(restarts):
            model, trace = self.fit_once(dataset, self.hyper.seed + r * RESTART_SEED_STRIDE)
            trace.restart = r
            finals.append(trace.final_loss)
            if best is None or trace.final_loss < best[1].final_loss:
                best = (model, trace)
        model, trace = best
        trace.restart_losses = finals
        logger.info(
            f"Best restart {trace.restart}: loss {trace.final_loss:.10g} after {trace.outer_iterations} iterations"
        )
        return model, trace


def fit(
    dataset: Dataset,
    hyper: Hyperparameters,
    init_strategy: str = DEFAULT_INIT_STRATEGY,
    restarts: int = 1,
    threads: int = 1,
) -> Tuple[EonModel, FitTrace]:
    """Train an EON; see ``EonTrainer.fit``."""
    return EonTrainer(hyper, init_strategy=init_strategy, threads=threads).fit(dataset, restarts=restarts)
