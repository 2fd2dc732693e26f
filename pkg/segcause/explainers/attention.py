"""The model's own explanation E(X): saliency-weighted segment attention."""

from typing import Optional

import numpy as np

from segcause.data.types import TimeSeries
from segcause.explainers.base import BaseExplainer, normalize_attribution
from segcause.explainers.registry import register_explainer
from segcause.model.network import SegCauseModel, SegmentationPlan


def attribution_from_plan(plan: SegmentationPlan, row: int, parents: np.ndarray) -> np.ndarray:
    """E for one plan row.

    Each segment's mean reference attention is broadcast over its span,
    doubled on salient segments, zeroed for variables that feed no output
    and normalized to sum 1.
    """
    attention = plan.attention[row]
    spread = np.zeros_like(attention)
    bounds = plan.boundaries[row]
    for (start, end), salient in zip(zip(bounds, bounds[1:]), plan.saliency[row]):
        weight = 2.0 if salient else 1.0
        spread[:, start:end] = weight * attention[:, start:end].mean(axis=1, keepdims=True)
    return normalize_attribution(spread * parents[:, None])


def extract_attribution(
    model: SegCauseModel, x: TimeSeries, plan: Optional[SegmentationPlan] = None
) -> np.ndarray:
    """Normalized N×T importance map of one sequence (sums to 1)."""
    plan = plan if plan is not None else model.plan_series([x])
    return attribution_from_plan(plan, 0, _parent_weights(model))


def extract_attributions(model: SegCauseModel, series: list[TimeSeries]) -> np.ndarray:
    """Importance maps (B × N × T) for a list of sequences."""
    plan = model.plan_series(series)
    parents = _parent_weights(model)
    return np.stack([attribution_from_plan(plan, b, parents) for b in range(len(series))])


def segment_vector(attribution: np.ndarray, boundaries: tuple[int, ...]) -> np.ndarray:
    """Segment-level explanation g: mean attribution per (variable, segment), flattened."""
    attribution = np.asarray(attribution, dtype=np.float64)
    spans = zip(boundaries, boundaries[1:])
    columns = [attribution[:, start:end].mean(axis=1) for start, end in spans]
    return np.stack(columns, axis=1).reshape(-1)


def _parent_weights(model: SegCauseModel) -> np.ndarray:
    return model.decoder.mask.any(dim=0).numpy().astype(np.float64)


@register_explainer("segment_attention")
class SegmentAttentionExplainer(BaseExplainer):
    """Attention-guided segment explanation of the trained model."""

    def attribute(self, model: SegCauseModel, series: TimeSeries) -> np.ndarray:
        return extract_attribution(model, series)
