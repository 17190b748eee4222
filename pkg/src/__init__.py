"""Entropy-optimal networks: training, inference and experiment tooling."""

__version__ = "0.1.0"
