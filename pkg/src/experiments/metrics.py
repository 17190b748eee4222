"""Classification metrics."""

import numpy as np
from scipy.stats import rankdata

from ..errors import InvalidArgumentError, UndefinedMetricError


def _labels(values) -> np.ndarray:
    arr = np.asarray(values)
    # Distributions are stored one column per point
    return np.argmax(arr, axis=0) if arr.ndim == 2 else arr.astype(int)


def accuracy(predicted, true) -> float:
    """
    Fraction of points whose predicted label matches the true label.

    Either argument may be a label vector or an M x T matrix of label
    distributions (compared by argmax).
    """
    predicted, true = _labels(predicted), _labels(true)
    if predicted.shape != true.shape or predicted.size == 0:
        raise InvalidArgumentError(f"label arrays differ in length: {predicted.shape} vs {true.shape}")
    return float(np.mean(predicted == true))


def auc(scores, labels) -> float:
    """
    Area under the ROC curve via the Mann-Whitney rank statistic.

    Tied scores receive average ranks.

    Args:
        scores: Real scores, larger meaning more likely positive
        labels: Binary labels (0/1)

    Returns:
        AUC in [0, 1]
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise InvalidArgumentError(f"scores {scores.shape} and labels {labels.shape} must be equal-length vectors")
    positive = labels == 1
    n_pos, n_neg = int(positive.sum()), int((~positive).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs both classes present")
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def multiclass_auc(label_dist, labels) -> float:
    """One-vs-rest AUC averaged over the classes present (binary AUC for two classes)."""
    dist = np.asarray(label_dist, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    if dist.shape[0] == 2:
        return auc(dist[1], labels == 1)
    present = [m for m in range(dist.shape[0]) if 0 < np.sum(labels == m) < labels.size]
    if not present:
        raise UndefinedMetricError("AUC needs at least two classes present")
    return float(np.mean([auc(dist[m], labels == m) for m in present]))
