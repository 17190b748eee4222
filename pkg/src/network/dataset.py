"""Feature matrices paired with label distributions."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidArgumentError

# Tolerance for label columns read from text; accepted columns are renormalized
LABEL_ATOL = 1e-6


@dataclass(frozen=True)
class Dataset:
    """
    Features X (K0 x T) and label distributions pi (M x T).

    NaN entries of X mark features that were not observed for a point.
    """

    X: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, copy=True)
        pi = np.array(self.pi, dtype=np.float64, copy=True)
        if X.ndim != 2 or pi.ndim != 2:
            raise InvalidArgumentError(f"X and pi must be matrices, got {X.shape} and {pi.shape}")
        if X.shape[1] < 1 or X.shape[1] != pi.shape[1]:
            raise InvalidArgumentError(f"X has {X.shape[1]} points but pi has {pi.shape[1]}")
        if np.isinf(X).any():
            raise InvalidArgumentError("X contains infinite entries")
        if not np.all(np.isfinite(pi)) or pi.min() < 0:
            raise InvalidArgumentError("pi must be finite and non-negative")
        sums = pi.sum(axis=0)
        bad = np.nonzero(np.abs(sums - 1.0) > LABEL_ATOL)[0]
        if bad.size:
            raise InvalidArgumentError(f"pi column {bad[0]} sums to {sums[bad[0]]:.9g}")
        pi /= sums
        X.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "pi", pi)

    @classmethod
    def from_labels(cls, X: np.ndarray, labels: Sequence[int], n_labels: Optional[int] = None) -> "Dataset":
        """Build a dataset with one-hot label columns."""
        labels = np.asarray(labels, dtype=int)
        if labels.size and labels.min() < 0:
            raise InvalidArgumentError("labels must be non-negative")
        M = n_labels if n_labels is not None else int(labels.max()) + 1
        pi = np.zeros((M, labels.size))
        pi[labels, np.arange(labels.size)] = 1.0
        return cls(X=X, pi=pi)

    @property
    def K0(self) -> int:
        return self.X.shape[0]

    @property
    def T(self) -> int:
        return self.X.shape[1]

    @property
    def n_labels(self) -> int:
        return self.pi.shape[0]

    @property
    def observed(self) -> np.ndarray:
        """Boolean K0 x T mask of observed feature values."""
        return ~np.isnan(self.X)

    @property
    def labels(self) -> np.ndarray:
        """Most probable label of every point."""
        return np.argmax(self.pi, axis=0)

    def subset(self, index: Sequence[int]) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return Dataset(X=self.X[:, index], pi=self.pi[:, index])
