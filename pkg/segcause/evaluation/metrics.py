"""Ranking metrics and the stability coefficient."""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.metrics import average_precision_score, roc_auc_score

from segcause.utils.exceptions import ConfigurationError, MetricUndefinedError


def _as_binary(scores: Sequence[float], labels: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise MetricUndefinedError(f"{scores.shape[0]} scores for {labels.shape[0]} labels")
    if not np.isin(labels, (0, 1)).all():
        raise MetricUndefinedError("labels must be binary (0/1)")
    return scores, labels.astype(np.int64)


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability that a random positive outranks a random negative (ties count ½).

    Raises:
        MetricUndefinedError: If only one class is present
    """
    scores, labels = _as_binary(scores, labels)
    if np.unique(labels).size < 2:
        raise MetricUndefinedError("AUROC is undefined when only one class is present")
    return float(roc_auc_score(labels, scores))


def auprc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Average precision (step-wise precision–recall area).

    Raises:
        MetricUndefinedError: If there is no positive example
    """
    scores, labels = _as_binary(scores, labels)
    if labels.sum() == 0:
        raise MetricUndefinedError("AUPRC is undefined without positive examples")
    return float(average_precision_score(labels, scores))


def mse(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error over all entries."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise MetricUndefinedError(f"shape mismatch {predictions.shape} vs {targets.shape}")
    return float(np.mean((predictions - targets) ** 2))


@dataclass(frozen=True)
class StabilityResult:
    """Coefficient of variation of per-seed degradations."""

    per_seed_delta: list[float] = field(default_factory=list)
    coefficient: float = float("nan")
    defined: bool = True


def stability(deltas_per_seed: Sequence[float]) -> StabilityResult:
    """Sample standard deviation over mean of the per-seed deltas.

    A nonpositive mean leaves the coefficient undefined (NaN, ``defined`` False).

    Raises:
        ConfigurationError: If fewer than two seeds are given
    """
    deltas = [float(d) for d in deltas_per_seed]
    if len(deltas) < 2:
        raise ConfigurationError(f"stability needs at least 2 seeds, got {len(deltas)}")
    mean = float(np.mean(deltas))
    if mean <= 0:
        return StabilityResult(deltas, float("nan"), defined=False)
    return StabilityResult(deltas, float(np.std(deltas, ddof=1)) / mean)
