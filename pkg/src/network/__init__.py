"""EON models: structure, training, inference and adversarial search."""

from .adversarial import AdversarialResult, find_adversarial, find_adversarial_batch, solve_x_given_gamma
from .dataset import Dataset
from .inference import Prediction, RowFailure, predict, predict_batch, reliability_score
from .model import EonModel, Gamma0, build_a_matrices, descriptor_length, validate
from .persistence import load, save
from .training import FitTrace, check_contraction, check_uniqueness, fit

__all__ = [
    "AdversarialResult",
    "Dataset",
    "EonModel",
    "FitTrace",
    "Gamma0",
    "Prediction",
    "RowFailure",
    "build_a_matrices",
    "check_contraction",
    "check_uniqueness",
    "descriptor_length",
    "find_adversarial",
    "find_adversarial_batch",
    "fit",
    "load",
    "predict",
    "predict_batch",
    "reliability_score",
    "save",
    "solve_x_given_gamma",
    "validate",
]
