"""Numerics on probability simplices."""

from .simplex import (
    block_softmax,
    entropic_columns,
    floor_columns,
    lipschitz_survey,
    monte_carlo_lipschitz,
    neg_entropy,
    normalized_entropy,
    softmax,
    softmax_lipschitz_bound,
    solve_entropic_lp,
    spectral_norm,
)

__all__ = [
    "block_softmax",
    "entropic_columns",
    "floor_columns",
    "lipschitz_survey",
    "monte_carlo_lipschitz",
    "neg_entropy",
    "normalized_entropy",
    "softmax",
    "softmax_lipschitz_bound",
    "solve_entropic_lp",
    "spectral_norm",
]
