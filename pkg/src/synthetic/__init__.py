"""Synthetic benchmark datasets and their complexity measures."""

from .complexity import data_complexity, kolmogorov_complexity
from .generators import (
    gen_bioinformatics,
    gen_rings,
    gen_stacked_gaussians,
    generate,
    random_rotation,
    ring_geometries,
)

__all__ = [
    "data_complexity",
    "gen_bioinformatics",
    "gen_rings",
    "gen_stacked_gaussians",
    "generate",
    "kolmogorov_complexity",
    "random_rotation",
    "ring_geometries",
]
