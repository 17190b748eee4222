"""Parameter counts of exact generating rules (KC) and of memorizing the data (DC)."""

from ..errors import InvalidArgumentError
from ..models import SyntheticSpec

BIOINFORMATICS_KC = 13


def kolmogorov_complexity(spec: SyntheticSpec) -> int:
    """
    Parameters sufficient to state the rule that generated a dataset.

    - bioinformatics: two separating lines in two dims, cluster labels (13)
    - stacked-gaussians: K-1 hyperplanes with D+1 parameters each, plus K labels
    - rings: per ring a center (D), plane basis (2D), radius and label
    """
    if spec.kind == "bioinformatics":
        return BIOINFORMATICS_KC
    if spec.kind == "stacked-gaussians":
        return (spec.K - 1) * (spec.D + 1) + spec.K
    return spec.K * (3 * spec.D + 2)


def data_complexity(T: int, K0: int) -> int:
    """Parameters needed to memorize T points with K0 features and a label each."""
    if T < 1 or K0 < 1:
        raise InvalidArgumentError(f"T and K0 must be >= 1, got T={T}, K0={K0}")
    return T * (K0 + 1)
