"""Explainer base class and attribution helpers."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from segcause.data.types import TimeSeries
from segcause.utils.exceptions import NormalizationError

if TYPE_CHECKING:
    from segcause.model.network import SegCauseModel


@dataclass
class Attribution:
    """Normalized importance map of one sequence."""

    values: np.ndarray
    method: str
    series_id: str = ""

    def __repr__(self) -> str:
        return f"Attribution(method={self.method}, id={self.series_id}, shape={self.values.shape})"


def normalize_attribution(values: np.ndarray) -> np.ndarray:
    """Absolute values scaled to sum 1; an all-zero map becomes uniform.

    Raises:
        NormalizationError: If the map contains non-finite entries
    """
    values = np.abs(np.asarray(values, dtype=np.float64))
    if not np.all(np.isfinite(values)):
        raise NormalizationError("attribution contains non-finite entries")
    total = values.sum()
    if total <= 0:
        return np.full(values.shape, 1.0 / values.size)
    return values / total


class BaseExplainer(ABC):
    """Abstract base class for attribution methods."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.name = self.__class__.__name__.replace("Explainer", "").lower()

    @abstractmethod
    def attribute(self, model: "SegCauseModel", series: TimeSeries) -> np.ndarray:
        """Raw (unnormalized) N×T attribution of one sequence."""
        pass

    def explain(self, model: "SegCauseModel", series: TimeSeries) -> Attribution:
        """Attribution normalized to sum 1."""
        values = normalize_attribution(self.attribute(model, series))
        return Attribution(values, self.name, series.id)
