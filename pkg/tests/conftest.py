"""
Shared fixtures for the EON test suite.
"""

from typing import Callable, List, Optional

import numpy as np
import pytest

from src.models import Hyperparameters
from src.network.dataset import Dataset
from src.network.model import EonModel, Gamma0
from src.numerics.simplex import floor_columns


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so every test sees the same draws."""
    return np.random.default_rng(12345)


@pytest.fixture
def separable_dataset() -> Dataset:
    """Two well separated 1-D clusters with opposite labels."""
    X = np.concatenate([np.linspace(0.0, 0.1, 10), np.linspace(0.9, 1.0, 10)])[None, :]
    labels = np.array([0] * 10 + [1] * 10)
    return Dataset.from_labels(X, labels, 2)


@pytest.fixture
def separable_hyper() -> Hyperparameters:
    """Settings under which the separable dataset is learned exactly."""
    return Hyperparameters(
        layer_dims=[1, 2, 2],
        epsilon=[1e-2, 1e-6, 1e-3],
        delta=[1e-3],
        gamma0_mode="feature-weights",
        seed=3,
    )


@pytest.fixture
def make_model() -> Callable[..., EonModel]:
    """Factory for random valid models."""

    def factory(
        rng: np.random.Generator,
        dims: List[int],
        mode: str = "feature-weights",
        n_train: int = 5,
        delta: float = 1.0,
        epsilon: Optional[List[float]] = None,
        floor: float = 1e-12,
    ) -> EonModel:
        N = len(dims) - 2
        hyper = Hyperparameters(
            layer_dims=dims,
            epsilon=epsilon or [0.5] + [1.0] * (N + 1),
            delta=[delta] * N,
            gamma0_mode=mode,
            theta_floor=floor,
        )
        theta = tuple(
            floor_columns(rng.dirichlet(np.ones(dims[n]), size=dims[n + 1]).T, floor) for n in range(1, N + 1)
        )
        K0 = dims[0]
        payload = {
            "fixed-uniform": {},
            "feature-weights": {"w": rng.dirichlet(np.ones(K0))},
            "rank-1": {"w": rng.dirichlet(np.ones(K0)), "s": rng.dirichlet(np.ones(n_train))},
            "full-matrix": {"matrix": rng.dirichlet(np.ones(K0 * n_train)).reshape(K0, n_train)},
        }[mode]
        return EonModel(
            S=rng.uniform(0, 1, (K0, dims[1])),
            theta=theta,
            gamma0=Gamma0(mode, **payload),
            hyper=hyper,
            n_train=n_train,
        )

    return factory


@pytest.fixture
def symmetric_model() -> EonModel:
    """Two codebook points at 0 and 1 with mirror-image labels."""
    hyper = Hyperparameters(layer_dims=[1, 2, 2], epsilon=[1.0, 1.0, 1.0], delta=[1.0], gamma0_mode="feature-weights")
    theta = np.array([[0.9, 0.1], [0.1, 0.9]])
    return EonModel(
        S=np.array([[0.0, 1.0]]),
        theta=(theta,),
        gamma0=Gamma0("feature-weights", w=np.array([1.0])),
        hyper=hyper,
        n_train=10,
    )
