"""
Deterministic generators for the synthetic benchmarks.

All datasets live in the unit hypercube and carry one-hot labels. Each generator
draws everything from ``numpy.random.default_rng(spec.seed)``, so a spec fully
determines its dataset.
"""

from dataclasses import dataclass
from typing import List

import numpy as np
from loguru import logger

from ..errors import InvalidArgumentError
from ..models import SyntheticSpec
from ..network.dataset import Dataset

# Bioinformatics layout: three clusters in an L in the first two dims, two classes.
# The label-1 cluster shares its x with one label-0 cluster and its y with the other.
BIO_CENTERS = np.array([[0.3, 0.3], [0.3, 0.7], [0.7, 0.7]])
BIO_CLUSTER_LABELS = np.array([0, 1, 0])
BIO_NOISE_DIMS = 4


@dataclass(frozen=True)
class RingGeometry:
    """A circle of radius ``radius`` around ``center`` in the plane spanned by ``basis`` (D x 2)."""

    center: np.ndarray
    basis: np.ndarray
    radius: float


def random_rotation(D: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal D x D matrix from the QR factorization of a Gaussian matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((D, D)))
    return Q * np.sign(np.diag(R))


def _balanced_labels(T: int, K: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(np.arange(T) % K)


def _rescale_unit(Y: np.ndarray) -> np.ndarray:
    lo, hi = Y.min(axis=0), Y.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return np.where(hi > lo, (Y - lo) / span, 0.5)


def gen_stacked_gaussians(spec: SyntheticSpec) -> Dataset:
    """
    K unit-variance Gaussians centered along a line, randomly rotated.

    Consecutive centers are ``spec.separation`` standard deviations apart, so the
    classes are separated by K-1 parallel hyperplanes. Features are rescaled per
    dimension into [0, 1].
    """
    rng = np.random.default_rng(spec.seed)
    R = random_rotation(spec.D, rng)
    labels = _balanced_labels(spec.T, spec.K, rng)
    offsets = (np.arange(spec.K) - (spec.K - 1) / 2.0) * spec.separation
    Z = rng.standard_normal((spec.T, spec.D))
    Z[:, 0] += offsets[labels]
    X = _rescale_unit(Z @ R.T)
    return Dataset.from_labels(X.T, labels, spec.K)


def _draw_ring_geometries(spec: SyntheticSpec, rng: np.random.Generator) -> List[RingGeometry]:
    rings = []
    for _ in range(spec.K):
        center = rng.uniform(0.25, 0.75, spec.D)
        basis, _ = np.linalg.qr(rng.standard_normal((spec.D, 2)))
        radius = float(rng.uniform(0.05, 0.2))
        rings.append(RingGeometry(center=center, basis=basis, radius=radius))
    return rings


def ring_geometries(spec: SyntheticSpec) -> List[RingGeometry]:
    """The rings ``gen_rings`` uses for this spec."""
    return _draw_ring_geometries(spec, np.random.default_rng(spec.seed))


def gen_rings(spec: SyntheticSpec) -> Dataset:
    """
    K randomly centered, randomly oriented rings in D dimensions.

    Points sit at uniform angles with Gaussian radial noise of
    ``spec.ring_noise`` times the radius; the label is the ring index.
    """
    if spec.kind != "rings" or spec.D < 2:
        raise InvalidArgumentError("gen_rings needs a rings spec with D >= 2")
    rng = np.random.default_rng(spec.seed)
    rings = _draw_ring_geometries(spec, rng)
    labels = _balanced_labels(spec.T, spec.K, rng)
    angles = rng.uniform(0.0, 2.0 * np.pi, spec.T)
    radial = rng.standard_normal(spec.T) * spec.ring_noise

    X = np.empty((spec.T, spec.D))
    for k, ring in enumerate(rings):
        idx = labels == k
        direction = np.cos(angles[idx])[:, None] * ring.basis[:, 0] + np.sin(angles[idx])[:, None] * ring.basis[:, 1]
        X[idx] = ring.center + (ring.radius * (1.0 + radial[idx]))[:, None] * direction
    clipped = int(((X < 0) | (X > 1)).any(axis=1).sum())
    if clipped:
        logger.warning(f"{clipped} ring points clipped into the unit hypercube")
    return Dataset.from_labels(np.clip(X, 0.0, 1.0).T, labels, spec.K)


def gen_bioinformatics(T: int = 600, seed: int = 0, cluster_sigma: float = 0.03) -> Dataset:
    """
    Six-dimensional two-class problem with two informative dimensions.

    Three Gaussian clusters in dims 1-2, separated by one line per dim, map
    to labels (0, 1, 0); dims 3-6 are i.i.d. uniform noise.
    """
    if T < 3:
        raise InvalidArgumentError(f"need at least 3 points, got {T}")
    rng = np.random.default_rng(seed)
    clusters = _balanced_labels(T, len(BIO_CENTERS), rng)
    informative = BIO_CENTERS[clusters] + cluster_sigma * rng.standard_normal((T, 2))
    noise = rng.uniform(0.0, 1.0, (T, BIO_NOISE_DIMS))
    X = np.hstack([np.clip(informative, 0.0, 1.0), noise])
    return Dataset.from_labels(X.T, BIO_CLUSTER_LABELS[clusters], 2)


def generate(spec: SyntheticSpec) -> Dataset:
    """Dispatch on ``spec.kind``."""
    logger.info(f"Generating {spec.kind} dataset: D={spec.D}, K={spec.K}, T={spec.T}, seed={spec.seed}")
    if spec.kind == "stacked-gaussians":
        return gen_stacked_gaussians(spec)
    if spec.kind == "rings":
        return gen_rings(spec)
    return gen_bioinformatics(spec.T, spec.seed, spec.cluster_sigma)
