"""
Validated configuration and report schemas.

Numeric artifacts (codebooks, layer matrices, activations) are plain numpy
containers defined next to the code that produces them; everything that is
read from a config file or written into a report lives here as a pydantic
model so that it is validated on the way in and serialized on the way out.
"""

import math
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import config

Gamma0Mode = Literal["fixed-uniform", "feature-weights", "rank-1", "full-matrix"]
SyntheticKind = Literal["stacked-gaussians", "rings", "bioinformatics"]
MetricName = Literal["accuracy", "auc"]

# Grid used when an experiment config does not name one
DEFAULT_GRID: Dict[str, List[float]] = {
    "delta": [1e-5, 1e-4, 1e-3, 5e-3, 1e-2, 1e-1, 1.0, 10.0],
    "epsilon0": [1e-3, 3e-3, 4e-3, 5e-3, 8e-3],
    "epsilon1": [1e-12, 1e-6, 1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3],
    "K": [3, 4, 5, 6, 7, 8],
}
GRID_KEYS = ("K", "delta", "epsilon0", "epsilon1", "epsilon_out")
# Single values used for keys a partial grid leaves out
GRID_FALLBACK: Dict[str, List[float]] = {"K": [3], "delta": [1e-3], "epsilon0": [5e-3], "epsilon1": [1e-4]}


# ============================================================================
# MODEL HYPERPARAMETERS
# ============================================================================


class Hyperparameters(BaseModel):
    """
    Hyperparameters of an EON with N entropic layers.

    ``layer_dims`` holds K0..K_{N+1}, ``epsilon`` holds eps0..eps_{N+1} and
    ``delta`` holds delta_1..delta_N. Epsilon values below ``HARD_EPSILON``
    (zero included) select the zero-temperature limit of the layer update.
    """

    model_config = ConfigDict(frozen=True)

    layer_dims: List[int] = Field(..., min_length=3)
    epsilon: List[float]
    delta: List[float]
    gamma0_mode: Gamma0Mode = "feature-weights"
    tolerance: float = Field(default=config.TOLERANCE, gt=0)
    max_outer_iters: int = Field(default=config.MAX_OUTER_ITERS, ge=1)
    max_gamma_iters: int = Field(default=config.MAX_GAMMA_ITERS, ge=1)
    gamma_tolerance: float = Field(default=config.GAMMA_TOLERANCE, gt=0)
    theta_floor: float = Field(default=config.THETA_FLOOR, gt=0)
    seed: int = config.SEED

    @field_validator("layer_dims")
    @classmethod
    def dims_positive(cls, v):
        if any(k < 1 for k in v):
            raise ValueError(f"all layer dimensions must be >= 1, got {v}")
        return v

    @field_validator("epsilon")
    @classmethod
    def epsilon_non_negative(cls, v):
        if any(not math.isfinite(e) or e < 0 for e in v):
            raise ValueError(f"epsilon values must be finite and >= 0, got {v}")
        return v

    @field_validator("delta")
    @classmethod
    def delta_positive(cls, v):
        if any(not math.isfinite(d) or d <= 0 for d in v):
            raise ValueError(f"delta values must be finite and > 0, got {v}")
        return v

    @model_validator(mode="after")
    def check_lengths(self):
        n = len(self.layer_dims) - 2
        if len(self.epsilon) != n + 2:
            raise ValueError(
                f"expected {n + 2} epsilon values for {n} entropic layers, got {len(self.epsilon)}"
            )
        if len(self.delta) != n:
            raise ValueError(f"expected {n} delta values, got {len(self.delta)}")
        if not self.epsilon[0] > 0:
            raise ValueError(f"epsilon0 must be > 0, got {self.epsilon[0]}")
        if not self.theta_floor < 1.0 / max(self.layer_dims):
            raise ValueError(
                f"theta_floor {self.theta_floor} must be below 1/max(K) = {1.0 / max(self.layer_dims)}"
            )
        return self

    @property
    def n_layers(self) -> int:
        """Number of entropic layers N."""
        return len(self.layer_dims) - 2

    @property
    def gamma_epsilon(self) -> List[float]:
        """eps_1..eps_{N+1}, the temperatures of the activation layers."""
        return list(self.epsilon[1:])


# ============================================================================
# SYNTHETIC DATA
# ============================================================================


class SyntheticSpec(BaseModel):
    """Parameters of a synthetic benchmark dataset."""

    kind: SyntheticKind
    D: int = Field(default=2, ge=1)
    K: int = Field(default=2, ge=1)
    T: int = Field(default=1000, ge=1)
    seed: int = 0
    separation: float = Field(default=8.0, gt=0, description="Gaussian center spacing in sigmas")
    ring_noise: float = Field(default=0.02, ge=0, description="Radial noise as a fraction of the radius")
    cluster_sigma: float = Field(default=0.03, gt=0, description="Bioinformatics cluster spread")

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind == "rings" and self.D < 2:
            raise ValueError("rings need D >= 2")
        if self.kind != "bioinformatics" and self.T < self.K:
            raise ValueError(f"T={self.T} must be >= K={self.K}")
        return self


# ============================================================================
# EXPERIMENTS
# ============================================================================


class ExperimentConfig(BaseModel):
    """
    Monte-Carlo cross-validation experiment.

    Split sizes are counts when >= 1 and fractions of T otherwise; the training
    block is whatever remains after validation and test are carved out.
    """

    dataset_path: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    validation_size: Union[int, float] = Field(default=0.05, gt=0)
    test_size: Union[int, float] = Field(default=0.1, gt=0)
    folds: int = Field(default=20, ge=1)
    grid: Dict[str, List[float]] = Field(default_factory=lambda: dict(DEFAULT_GRID))
    n_hidden: int = Field(default=1, ge=1)
    gamma0_mode: Gamma0Mode = "feature-weights"
    restarts: int = Field(default=1, ge=1)
    seed: int = config.SEED
    metric: MetricName = "accuracy"
    nested: bool = False
    threads: int = Field(default=config.THREADS, ge=1)
    tolerance: float = Field(default=config.TOLERANCE, gt=0)
    max_outer_iters: int = Field(default=config.MAX_OUTER_ITERS, ge=1)
    max_gamma_iters: int = Field(default=config.MAX_GAMMA_ITERS, ge=1)
    theta_floor: float = Field(default=config.THETA_FLOOR, gt=0)
    weight_threshold: float = Field(default=config.WEIGHT_THRESHOLD, ge=0, lt=1)

    @field_validator("grid")
    @classmethod
    def grid_keys_known(cls, v):
        unknown = set(v) - set(GRID_KEYS)
        if unknown:
            raise ValueError(f"unknown grid keys {sorted(unknown)}; allowed {list(GRID_KEYS)}")
        for key, values in v.items():
            if not values:
                raise ValueError(f"grid entry '{key}' is empty")
        merged = {key: list(values) for key, values in GRID_FALLBACK.items()}
        merged.update(v)
        return merged

    @model_validator(mode="after")
    def check_source(self):
        if (self.dataset_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of dataset_path or synthetic must be given")
        return self

    def split_counts(self, T: int) -> Dict[str, int]:
        """Resolve split sizes against a dataset of T points."""

        def resolve(size: Union[int, float]) -> int:
            return int(size) if size >= 1 else int(round(size * T))

        n_val, n_test = resolve(self.validation_size), resolve(self.test_size)
        n_train = T - n_val - n_test
        if n_val < 1 or n_test < 1 or n_train < 1:
            raise ValueError(
                f"split sizes train={n_train}, validation={n_val}, test={n_test} invalid for T={T}"
            )
        return {"train": n_train, "validation": n_val, "test": n_test}


class CellResult(BaseModel):
    """One (fold, grid cell) row of a cross-validation run."""

    model_config = ConfigDict(from_attributes=True)

    fold: int
    cell: int
    K: int
    delta: float
    epsilon0: float
    epsilon1: float
    epsilon_out: float
    validation_metric: Optional[float] = None
    test_metric: Optional[float] = None
    fit_seconds: float = 0.0
    predict_seconds: float = 0.0
    descriptor_length: Optional[int] = None
    outer_iterations: Optional[int] = None
    final_loss: Optional[float] = None
    error: Optional[str] = None


class ResultsReport(BaseModel):
    """Structured JSON report written next to the results CSV."""

    schema_version: int = 1
    config: ExperimentConfig
    rows: List[CellResult]
    best: List[CellResult]
    mean_test_metric: Optional[float] = None


# ============================================================================
# DIAGNOSTIC REPORTS
# ============================================================================


class ConditionReport(BaseModel):
    """Uniqueness and contraction diagnostics of the activation fixed point."""

    uniqueness_holds: bool
    min_epsilon_needed: float
    contraction_holds: bool
    contraction_constant: float


class AuditReport(BaseModel):
    """Descriptor length of a model against data complexity."""

    descriptor_length: int
    weight_threshold: float = Field(..., ge=0, lt=1)
    informative_dims: List[int]
    data_complexity: Optional[int] = None
    kolmogorov_complexity: Optional[int] = None
