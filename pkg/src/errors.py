"""
Error kinds raised by the EON toolkit.

The command-line front end maps these onto exit codes, so every failure a
caller might want to distinguish gets its own class.
"""

from typing import List, Optional


class EonError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(EonError, ValueError):
    """An argument violates a documented precondition."""


class NumericalFailureError(EonError):
    """A non-finite value appeared during a fixed-point or block update."""

    def __init__(self, message: str, layer: Optional[int] = None, iteration: Optional[int] = None):
        self.layer = layer
        self.iteration = iteration
        details = []
        if layer is not None:
            details.append(f"layer {layer}")
        if iteration is not None:
            details.append(f"outer iteration {iteration}")
        suffix = f" ({', '.join(details)})" if details else ""
        super().__init__(f"{message}{suffix}")

    def at_iteration(self, iteration: int) -> "NumericalFailureError":
        """Return a copy annotated with the outer iteration it occurred in."""
        base = str(self).split(" (")[0]
        return NumericalFailureError(base, layer=self.layer, iteration=iteration)


class ModelValidationError(EonError, ValueError):
    """A model failed its structural invariants."""

    def __init__(self, violations: List[str]):
        self.violations = violations
        super().__init__("invalid model: " + "; ".join(violations))


class ModelFileError(EonError):
    """Base class for model persistence failures."""


class ModelIOError(ModelFileError):
    """The model file could not be read or written."""


class MalformedModelFileError(ModelFileError):
    """The model file is truncated or structurally corrupt."""


class VersionMismatchError(ModelFileError):
    """The model file was written by an unsupported format version."""


class DataParseError(EonError, ValueError):
    """A dataset or config file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class UndefinedMetricError(EonError, ValueError):
    """A metric is undefined for the given inputs (e.g. AUC with one class)."""
