"""
The trained EON artifact and the quantities derived from it.

An ``EonModel`` bundles the codebook S (K0 x K1), the column-stochastic layer
matrices theta^(n) (K_n x K_{n+1}), the input-weight payload gamma0 and the
hyperparameters it was trained with. Arrays are copied and frozen on
construction, so a model can be shared between threads without locking.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .. import config
from ..errors import InvalidArgumentError, ModelValidationError
from ..models import Hyperparameters

GAMMA0_MODES = ("fixed-uniform", "feature-weights", "rank-1", "full-matrix")
COLUMN_ATOL = 1e-12
PAYLOAD_ATOL = 1e-10


def _frozen(arr: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if arr is None:
        return None
    out = np.array(arr, dtype=np.float64, order="C", copy=True)
    out.setflags(write=False)
    return out


def split_epsilon0(epsilon0: float, K0: int, T: int) -> Tuple[float, float]:
    """
    Split eps0 into the feature part and the data-point part.

    The shares are log K0 / log(K0 T) and log T / log(K0 T), so they add up
    to eps0. A single-cell problem (K0 = T = 1) splits evenly.
    """
    if K0 * T == 1:
        return epsilon0 / 2.0, epsilon0 / 2.0
    total = math.log(K0 * T)
    return epsilon0 * math.log(K0) / total, epsilon0 * math.log(T) / total


@dataclass(frozen=True)
class Gamma0:
    """
    Input-reliability weights gamma0 in one of four parameterizations.

    - fixed-uniform: no payload, gamma0 = 1 / (K0 T) everywhere
    - feature-weights: ``w`` over features, gamma0 = w 1^T / T
    - rank-1: ``w`` over features and ``s`` over training points, gamma0 = w s^T
    - full-matrix: ``matrix`` of shape K0 x T with unit total mass
    """

    mode: str
    w: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in GAMMA0_MODES:
            raise InvalidArgumentError(f"unknown gamma0 mode '{self.mode}'")
        for name in ("w", "s", "matrix"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def uniform(cls, mode: str, K0: int, T: int, observed: Optional[np.ndarray] = None) -> "Gamma0":
        """Starting payload: uniform over its support."""
        if mode == "fixed-uniform":
            return cls(mode)
        if mode == "feature-weights":
            return cls(mode, w=np.full(K0, 1.0 / K0))
        if mode == "rank-1":
            return cls(mode, w=np.full(K0, 1.0 / K0), s=np.full(T, 1.0 / T))
        mask = np.ones((K0, T), dtype=bool) if observed is None else observed
        return cls(mode, matrix=mask / mask.sum())

    def training_matrix(self, K0: int, T: int) -> np.ndarray:
        """gamma0 as a K0 x T matrix over the training points."""
        if self.mode == "fixed-uniform":
            return np.full((K0, T), 1.0 / (K0 * T))
        if self.mode == "feature-weights":
            return np.repeat(self.w[:, None] / T, T, axis=1)
        if self.mode == "rank-1":
            return np.outer(self.w, self.s)
        return np.array(self.matrix)

    def feature_weights(self, K0: int) -> np.ndarray:
        """Marginal weight of every feature (sums to 1)."""
        if self.mode == "fixed-uniform":
            return np.full(K0, 1.0 / K0)
        if self.mode == "full-matrix":
            return self.matrix.sum(axis=1)
        return np.array(self.w)

    def regularizer(self, epsilon0: float, K0: int, T: int) -> float:
        """Entropic penalty of gamma0 as it enters the training loss."""
        eps_w, eps_s = split_epsilon0(epsilon0, K0, T)
        if self.mode == "fixed-uniform":
            return epsilon0 * math.log(1.0 / (K0 * T))
        if self.mode == "feature-weights":
            return eps_w * float(np.sum(special.xlogy(self.w, self.w)))
        if self.mode == "rank-1":
            return eps_w * float(np.sum(special.xlogy(self.w, self.w))) + eps_s * float(
                np.sum(special.xlogy(self.s, self.s))
            )
        return epsilon0 * float(np.sum(special.xlogy(self.matrix, self.matrix)))


@dataclass(frozen=True)
class EonModel:
    """
    Trained EON.

    Attributes:
        S: Codebook, K0 x K1
        theta: Layer matrices theta^(1..N), theta^(n) of shape K_n x K_{n+1}
        gamma0: Input-weight payload
        hyper: Hyperparameters used for training
        n_train: Number of training points T
    """

    S: np.ndarray
    theta: Tuple[np.ndarray, ...]
    gamma0: Gamma0
    hyper: Hyperparameters
    n_train: int = field(default=1)

    def __post_init__(self):
        object.__setattr__(self, "S", _frozen(self.S))
        object.__setattr__(self, "theta", tuple(_frozen(t) for t in self.theta))

    @property
    def layer_dims(self) -> List[int]:
        return list(self.hyper.layer_dims)

    @property
    def n_layers(self) -> int:
        return self.hyper.n_layers

    def feature_weights(self) -> np.ndarray:
        return self.gamma0.feature_weights(self.layer_dims[0])

    def test_gamma0_column(self) -> np.ndarray:
        """gamma0 column applied to an unseen point, on the training scale."""
        return self.feature_weights() / self.n_train

    def epsilon0_split(self) -> Tuple[float, float]:
        return split_epsilon0(self.hyper.epsilon[0], self.layer_dims[0], self.n_train)


def validate(model: EonModel) -> List[str]:
    """
    Check the structural invariants of a model.

    Returns:
        One message per violation naming the field and the numeric residual;
        empty when the model is valid
    """
    violations: List[str] = []
    dims = model.layer_dims
    floor = model.hyper.theta_floor

    if model.S.shape != (dims[0], dims[1]):
        violations.append(f"S has shape {model.S.shape}, expected {(dims[0], dims[1])}")
    else:
        for d, k in zip(*np.nonzero(~np.isfinite(model.S))):
            violations.append(f"S[{d},{k}] is not finite")

    if len(model.theta) != model.n_layers:
        violations.append(f"expected {model.n_layers} theta matrices, got {len(model.theta)}")
    for n, theta in enumerate(model.theta, start=1):
        expected = (dims[n], dims[n + 1]) if n < len(dims) - 1 else None
        if theta.shape != expected:
            violations.append(f"theta[{n}] has shape {theta.shape}, expected {expected}")
            continue
        if not np.all(np.isfinite(theta)):
            violations.append(f"theta[{n}] has non-finite entries")
            continue
        for j, total in enumerate(theta.sum(axis=0)):
            residual = abs(total - 1.0)
            if residual > COLUMN_ATOL:
                violations.append(f"theta[{n}] column {j} sums to {total:.12g} (residual {residual:.3g})")
        low = theta.min()
        if low < floor * (1.0 - 1e-9):
            violations.append(f"theta[{n}] has entry {low:.3g} below floor {floor:.3g}")

    violations.extend(_validate_gamma0(model.gamma0, model.hyper.gamma0_mode, dims[0], model.n_train))
    return violations


def _validate_gamma0(gamma0: Gamma0, mode: str, K0: int, T: int) -> List[str]:
    problems: List[str] = []
    if gamma0.mode != mode:
        return [f"gamma0 mode '{gamma0.mode}' differs from hyperparameter mode '{mode}'"]
    payload = {"w": (K0,), "s": (T,), "matrix": (K0, T)}
    required = {
        "fixed-uniform": [],
        "feature-weights": ["w"],
        "rank-1": ["w", "s"],
        "full-matrix": ["matrix"],
    }[mode]
    for name in required:
        arr = getattr(gamma0, name)
        if arr is None:
            problems.append(f"gamma0.{name} missing for mode '{mode}'")
            continue
        if arr.shape != payload[name]:
            problems.append(f"gamma0.{name} has shape {arr.shape}, expected {payload[name]}")
            continue
        if not np.all(np.isfinite(arr)) or arr.min() < 0:
            problems.append(f"gamma0.{name} has negative or non-finite entries")
            continue
        residual = abs(arr.sum() - 1.0)
        if residual > PAYLOAD_ATOL:
            problems.append(f"gamma0.{name} sums to {arr.sum():.12g} (residual {residual:.3g})")
    return problems


def compute_a_matrices(theta: Sequence[np.ndarray], delta: Sequence[float], floor: float) -> List[np.ndarray]:
    """A^(n)[k_{n+1}, k_n] = -delta_n log(max(theta^(n)[k_n, k_{n+1}], floor))."""
    return [-d * np.log(np.maximum(t, floor)).T for t, d in zip(theta, delta)]


def build_a_matrices(model: EonModel) -> List[np.ndarray]:
    """Coupling matrices of a validated model, one per entropic layer."""
    violations = validate(model)
    if violations:
        raise ModelValidationError(violations)
    return compute_a_matrices(model.theta, model.hyper.delta, model.hyper.theta_floor)


def informative_dims(model: EonModel, weight_threshold: float = config.WEIGHT_THRESHOLD) -> List[int]:
    """Feature indices whose gamma0 weight exceeds the threshold."""
    if model.gamma0.mode == "fixed-uniform":
        return list(range(model.layer_dims[0]))
    return [int(d) for d in np.nonzero(model.feature_weights() > weight_threshold)[0]]


def descriptor_length(model: EonModel, weight_threshold: float = config.WEIGHT_THRESHOLD) -> int:
    """
    Number of effective parameters of a model.

    Counts the codebook entries of informative features, (K_{n+1} - 1) K_n
    entries per layer matrix, and K0 feature weights unless gamma0 is fixed.

    Args:
        model: Trained model
        weight_threshold: Features with weight at or below this are ignored

    Returns:
        Parameter count
    """
    if not 0 <= weight_threshold < 1:
        raise InvalidArgumentError(f"weight_threshold must be in [0, 1), got {weight_threshold}")
    dims = model.layer_dims
    count = len(informative_dims(model, weight_threshold)) * dims[1]
    count += sum((dims[n + 1] - 1) * dims[n] for n in range(1, len(dims) - 1))
    if model.gamma0.mode != "fixed-uniform":
        count += dims[0]
    return count
