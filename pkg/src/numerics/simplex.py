"""
Probability-simplex numerics.

This module provides:
- Stabilized softmax, per-block softmax and column-wise softmax
- The closed-form solver of the entropy-regularized linear program
- Normalized entropy diagnostics and the signed ``sum p log p`` term used in losses
- Floor-constrained normalization of column-stochastic matrices
- Lipschitz bounds for softmax (analytic and Monte-Carlo)
- Spectral norms by power iteration

Every function is pure; nothing here holds state between calls.
"""

from typing import Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import special

from ..config import HARD_EPSILON
from ..errors import InvalidArgumentError, NumericalFailureError

SIMPLEX_ATOL = 1e-12


def _as_finite_vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def softmax(x) -> np.ndarray:
    """
    Softmax of a finite vector, shifted by its maximum before exponentiation.

    Args:
        x: Real vector

    Returns:
        Probability vector of the same length
    """
    return special.softmax(_as_finite_vector(x))


def block_softmax(blocks: Sequence) -> List[np.ndarray]:
    """Apply softmax independently to every block of a block vector."""
    if len(blocks) == 0:
        raise InvalidArgumentError("block vector has no blocks")
    result = []
    for i, block in enumerate(blocks):
        arr = np.asarray(block, dtype=np.float64)
        if arr.size == 0:
            raise InvalidArgumentError(f"block {i} is empty")
        result.append(softmax(arr))
    return result


def neg_entropy(p) -> float:
    """Return sum_k p_k log p_k with 0 log 0 = 0 (natural log, non-positive)."""
    arr = np.asarray(p, dtype=np.float64)
    return float(np.sum(special.xlogy(arr, arr)))


def normalized_entropy(p, base: int) -> float:
    """
    Entropy of a probability vector in units of ``log(base)``.

    Uniform vectors over ``base`` states score 1 and one-hot vectors score 0.

    Args:
        p: Probability vector
        base: Logarithm base, at least 2

    Returns:
        ``-sum p log_base p``
    """
    if base < 2:
        raise InvalidArgumentError(f"entropy base must be >= 2, got {base}")
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-9:
        raise InvalidArgumentError("normalized_entropy expects a probability vector")
    return float(np.sum(special.entr(arr)) / np.log(base))


def solve_entropic_lp(b, epsilon: float) -> np.ndarray:
    """
    Minimize <w, b> + epsilon <w, log w> over the probability simplex.

    The unique minimizer is softmax(-b / epsilon).
    """
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be > 0, got {epsilon}")
    return softmax(-_as_finite_vector(b, "b") / epsilon)


def entropic_columns(cost: np.ndarray, epsilon: float, layer: Optional[int] = None) -> np.ndarray:
    """
    Column-wise entropic LP solution for a K x M cost matrix.

    Entries equal to +inf are excluded (they receive probability 0). For
    ``epsilon < HARD_EPSILON`` the zero-temperature limit is taken: a one-hot
    column on the smallest cost, lowest index winning ties.

    Raises:
        NumericalFailureError: if a column has NaN entries or no finite cost
    """
    cost = np.asarray(cost, dtype=np.float64)
    if np.isnan(cost).any() or np.isneginf(cost).any():
        raise NumericalFailureError("non-finite activation cost", layer=layer)
    finite = np.isfinite(cost)
    if not finite.any(axis=0).all():
        raise NumericalFailureError("activation column without a finite cost", layer=layer)
    if epsilon < HARD_EPSILON:
        out = np.zeros_like(cost)
        out[np.argmin(cost, axis=0), np.arange(cost.shape[1])] = 1.0
        return out
    return special.softmax(-cost / epsilon, axis=0)


def floor_columns(counts: np.ndarray, floor: float) -> np.ndarray:
    """
    Normalize non-negative columns onto the simplex with every entry >= floor.

    For a column ``c`` this returns the maximizer of ``sum_k c_k log p_k`` over
    ``{p : p >= floor, sum p = 1}``: entries are ``max(floor, c_k / lam)`` with
    ``lam`` found by repeatedly clamping the entries that fall below the floor.
    Columns without mass become uniform.
    """
    counts = np.asarray(counts, dtype=np.float64)
    K, M = counts.shape
    if not 0 < floor * K < 1:
        raise InvalidArgumentError(f"floor {floor} infeasible for {K} rows")
    out = np.empty_like(counts)
    for j in range(M):
        c = counts[:, j]
        if c.sum() < 1e-300:
            out[:, j] = 1.0 / K
            continue
        clamped = np.zeros(K, dtype=bool)
        while True:
            scale = (1.0 - floor * clamped.sum()) / c[~clamped].sum()
            col = np.where(clamped, floor, c * scale)
            newly = ~clamped & (col < floor)
            if not newly.any():
                break
            clamped |= newly
        out[:, j] = col
    return out


def softmax_lipschitz_bound(K: int) -> float:
    """Upper bound (K-1)/K on the Lipschitz constant of softmax in K dims."""
    if K < 2:
        raise InvalidArgumentError(f"K must be >= 2, got {K}")
    return (K - 1) / K


def monte_carlo_lipschitz(K: int, samples: int, seed: int = 0) -> float:
    """
    Largest observed ratio ||softmax(x) - softmax(y)|| / ||x - y||.

    Pairs are drawn at random log-scales and random separations so that both
    distant and nearly coincident pairs are sampled. Pairs with x == y are skipped.
    """
    if K < 2:
        raise InvalidArgumentError(f"K must be >= 2, got {K}")
    if samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    best = 0.0
    batch = 10_000
    for start in range(0, samples, batch):
        n = min(batch, samples - start)
        x = rng.standard_normal((n, K)) * 10.0 ** rng.uniform(-2, 1, (n, 1))
        y = x + rng.standard_normal((n, K)) * 10.0 ** rng.uniform(-5, 0, (n, 1))
        den = np.linalg.norm(x - y, axis=1)
        num = np.linalg.norm(special.softmax(x, axis=1) - special.softmax(y, axis=1), axis=1)
        keep = den > 0
        if keep.any():
            best = max(best, float(np.max(num[keep] / den[keep])))
    return best


def lipschitz_survey(K_values: Iterable[int] = range(2, 65), samples: int = 100_000, seed: int = 0) -> pd.DataFrame:
    """Monte-Carlo Lipschitz estimates next to the analytic bound, one row per K."""
    rows = []
    for K in K_values:
        rows.append(
            {
                "K": K,
                "estimate": monte_carlo_lipschitz(K, samples, seed + K),
                "bound": softmax_lipschitz_bound(K),
            }
        )
    return pd.DataFrame(rows)


def spectral_norm(A, rtol: float = 1e-10, max_iters: int = 10_000, squarings: int = 64) -> float:
    """
    Largest singular value of A by power iteration on A^T A.

    The start vector is a column of (A^T A)^(2^s), built by repeated squaring
    of the normalized Gram matrix, so nearly equal top singular values do not
    stall the iteration. Plain power steps then run until the residual
    ||A^T A v - lam v|| drops to ``rtol * lam``; the returned value includes
    that residual and never falls short of ||A v|| for a unit v.

    Args:
        A: Finite real matrix
        rtol: Residual, relative to the eigenvalue estimate, that stops the iteration
        max_iters: Cap on plain power steps
        squarings: Cap on squarings of the Gram matrix

    Returns:
        ||A||_2
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("matrix contains non-finite entries")
    if A.size == 0:
        return 0.0
    gram = A.T @ A
    scale = np.linalg.norm(gram)
    if scale == 0.0:
        return 0.0
    power = gram / scale
    for _ in range(squarings):
        squared = power @ power
        norm = np.linalg.norm(squared)
        if norm == 0.0:
            break
        squared /= norm
        done = np.linalg.norm(squared - power) <= 1e-15
        power = squared
        if done:
            break
    v = power[:, int(np.argmax(np.linalg.norm(power, axis=0)))]
    v = v / np.linalg.norm(v)

    lam, residual = 0.0, np.inf
    for _ in range(max_iters):
        w = gram @ v
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        if residual <= rtol * lam:
            break
        v = w / np.linalg.norm(w)
    return float(np.sqrt(max(lam + residual, 0.0)))
