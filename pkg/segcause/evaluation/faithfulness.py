"""Perturbation-based faithfulness: mask the most (or least) attributed inputs and rescore."""

import math
from contextlib import contextmanager
from typing import Iterator, Literal, Optional, Sequence

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.stats import spearmanr

from segcause.config.validators import validate_percent
from segcause.data.scm import perturb_mask
from segcause.data.types import CausalMask, DegradationEntry, TimeSeries
from segcause.evaluation.metrics import auprc, auroc, mse
from segcause.explainers.attention import extract_attributions
from segcause.model.batching import infer_task, stack_labels, stack_targets
from segcause.model.network import SegCauseModel
from segcause.utils.constants import DEFAULT_K_PERCENT
from segcause.utils.exceptions import ConfigurationError, DimensionMismatchError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)

Metric = Literal["auroc", "auprc", "mse"]


class MaskingProtocol(BaseModel):
    """Which inputs to mask and how."""

    model_config = ConfigDict(frozen=True)

    k_percent: float = Field(DEFAULT_K_PERCENT, description="Share of N·T cells to mask")
    target: Literal["top", "bottom", "random"] = Field("top")
    granularity: Literal["pointwise", "segment"] = Field("pointwise")
    fill: Literal["mean", "zero"] = Field(
        "mean", description="Replacement value: the row mean (0 after normalization) or 0"
    )
    seed: int = Field(0, description="Seed for random masking")

    @field_validator("k_percent")
    @classmethod
    def _k(cls, v: float) -> float:
        return validate_percent(v, "k_percent")

    def cells(self, n_variables: int, length: int) -> int:
        """ceil(k%·N·T / 100)."""
        return math.ceil(self.k_percent * n_variables * length / 100.0)


def rank_cells(attribution: np.ndarray, target: Literal["top", "bottom"]) -> np.ndarray:
    """Flat (row-major) cell indices ordered by attribution.

    Ties go to the lower time index, then the lower variable index.
    """
    attribution = np.asarray(attribution, dtype=np.float64)
    n_variables, length = attribution.shape
    variable, time = np.divmod(np.arange(n_variables * length), length)
    values = attribution.reshape(-1)
    primary = -values if target == "top" else values
    return np.lexsort((variable, time, primary))


def select_cells(
    attribution: np.ndarray,
    protocol: MaskingProtocol,
    boundaries: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Boolean N×T mask of the cells to replace."""
    attribution = np.asarray(attribution, dtype=np.float64)
    n_variables, length = attribution.shape
    count = protocol.cells(n_variables, length)
    chosen = np.zeros(n_variables * length, dtype=bool)

    if protocol.target == "random":
        rng = rng if rng is not None else np.random.default_rng(protocol.seed)
        chosen[rng.choice(n_variables * length, size=count, replace=False)] = True
        return chosen.reshape(n_variables, length)

    if protocol.granularity == "pointwise":
        chosen[rank_cells(attribution, protocol.target)[:count]] = True
        return chosen.reshape(n_variables, length)

    if boundaries is None:
        raise ConfigurationError("segment granularity needs segment boundaries")
    blocks = [
        (n, start, end, float(attribution[n, start:end].mean()))
        for n in range(n_variables)
        for start, end in zip(boundaries, boundaries[1:])
    ]
    sign = -1.0 if protocol.target == "top" else 1.0
    blocks.sort(key=lambda b: (sign * b[3], b[1], b[0]))
    grid = chosen.reshape(n_variables, length)
    for n, start, end, _ in blocks:
        if grid.sum() >= count:
            break
        grid[n, start:end] = True
    return grid


def mask_series(series: TimeSeries, cells: np.ndarray, fill: str = "mean") -> TimeSeries:
    """Copy of ``series`` with the selected cells replaced."""
    values = series.values.copy()
    if cells.shape != values.shape:
        raise DimensionMismatchError(f"mask {cells.shape} vs series {values.shape}", "N×T")
    replacement = values.mean(axis=1, keepdims=True) if fill == "mean" else np.zeros_like(values)
    values = np.where(cells, np.broadcast_to(replacement, values.shape), values)
    return series.with_values(values)


def score_model(model: SegCauseModel, data: list[TimeSeries], metric: Metric) -> float:
    """Metric of the model on ``data`` (segmentation recomputed from the data).

    Binary classification scores the class-1 softmax probability; more classes
    use the macro one-vs-rest average.

    Raises:
        MetricUndefinedError: If the metric is undefined for these labels
    """
    predictions = model.predict(data)
    if metric == "mse":
        return mse(predictions, stack_targets(data).numpy())

    labels = stack_labels(data).numpy()
    probabilities = torch.softmax(torch.from_numpy(predictions), dim=1).numpy()
    rank = auroc if metric == "auroc" else auprc
    if probabilities.shape[1] == 2:
        return rank(probabilities[:, 1], labels)
    return float(
        np.mean([rank(probabilities[:, c], labels == c) for c in range(probabilities.shape[1])])
    )


def default_metric(data: list[TimeSeries]) -> Metric:
    task, _ = infer_task(data)
    return "auroc" if task == "classification" else "mse"


def mask_dataset(
    model: SegCauseModel,
    data: list[TimeSeries],
    protocol: MaskingProtocol,
    attributions: Optional[np.ndarray] = None,
) -> list[TimeSeries]:
    """Apply the masking protocol to every sequence."""
    if attributions is None:
        attributions = extract_attributions(model, data)
    boundaries = None
    if protocol.granularity == "segment" and protocol.target != "random":
        boundaries = model.plan_series(data).boundaries
    rng = np.random.default_rng(protocol.seed)
    masked = []
    for b, series in enumerate(data):
        cells = select_cells(
            attributions[b], protocol, None if boundaries is None else boundaries[b], rng
        )
        masked.append(mask_series(series, cells, protocol.fill))
    return masked


def mask_and_score(
    model: SegCauseModel,
    data: list[TimeSeries],
    protocol: MaskingProtocol,
    metric: Optional[Metric] = None,
    attributions: Optional[np.ndarray] = None,
) -> DegradationEntry:
    """Metric before and after masking, with the relative change in percent.

    Raises:
        MetricUndefinedError: If the metric is undefined before or after masking
    """
    metric = metric or default_metric(data)
    before = score_model(model, data, metric)
    after = score_model(model, mask_dataset(model, data, protocol, attributions), metric)
    entry = DegradationEntry.from_scores(before, after)
    logger.debug(
        f"mask {protocol.target} {protocol.k_percent}%: {metric} {before:.4f} -> {after:.4f} "
        f"({entry.delta_percent:+.2f}%)"
    )
    return entry


def masking_curve(
    model: SegCauseModel,
    data: list[TimeSeries],
    ratios: Sequence[float],
    protocol: Optional[MaskingProtocol] = None,
    metric: Optional[Metric] = None,
    attributions: Optional[np.ndarray] = None,
) -> list[dict]:
    """Degradation as a function of the masking ratio."""
    protocol = protocol or MaskingProtocol()
    if attributions is None:
        attributions = extract_attributions(model, data)
    rows = []
    for ratio in ratios:
        step = protocol.model_copy(update={"k_percent": validate_percent(ratio, "ratio")})
        entry = mask_and_score(model, data, step, metric, attributions)
        rows.append(
            {
                "k_percent": float(ratio),
                "target": step.target,
                "before": entry.before,
                "after": entry.after,
                "delta_percent": entry.delta_percent,
            }
        )
    return rows


def compare_high_low(
    model: SegCauseModel,
    data: list[TimeSeries],
    protocol: Optional[MaskingProtocol] = None,
    metric: Optional[Metric] = None,
    attributions: Optional[np.ndarray] = None,
) -> dict[str, DegradationEntry]:
    """Degradation from masking the most vs the least attributed inputs."""
    protocol = protocol or MaskingProtocol()
    if attributions is None:
        attributions = extract_attributions(model, data)
    return {
        target: mask_and_score(
            model, data, protocol.model_copy(update={"target": target}), metric, attributions
        )
        for target in ("top", "bottom")
    }


@contextmanager
def swapped_mask(model: SegCauseModel, mask: CausalMask) -> Iterator[SegCauseModel]:
    """Temporarily decode with another mask of the same shape."""
    original = model.decoder.mask.clone()
    if tuple(original.shape) != (mask.n_outputs, mask.n_variables):
        raise DimensionMismatchError(
            f"mask {mask.n_outputs}×{mask.n_variables} vs model {tuple(original.shape)}", "D×N"
        )
    model.decoder.mask.copy_(torch.from_numpy(mask.entries.astype(bool)))
    try:
        yield model
    finally:
        model.decoder.mask.copy_(original)


def mask_robustness(
    model: SegCauseModel,
    data: list[TimeSeries],
    flips: Sequence[int],
    seed: int = 0,
) -> tuple[list[dict], float]:
    """Forecasting MSE under perturbed masks.

    Returns:
        Rows (flips, distance, mse, excess_mse) and Spearman ρ between excess MSE
        and ‖M − M*‖²_F (NaN when either is constant)
    """
    reference_mask = model.causal_mask
    baseline = score_model(model, data, "mse")
    rows = [{"flips": 0, "distance": 0, "mse": baseline, "excess_mse": 0.0}]
    for count in flips:
        perturbed = perturb_mask(reference_mask, int(count), seed + int(count))
        with swapped_mask(model, perturbed):
            value = score_model(model, data, "mse")
        rows.append(
            {
                "flips": int(count),
                "distance": perturbed.frobenius_distance_sq(reference_mask),
                "mse": value,
                "excess_mse": value - baseline,
            }
        )
    distances = [r["distance"] for r in rows]
    excess = [r["excess_mse"] for r in rows]
    if len(set(distances)) < 2 or len(set(excess)) < 2:
        return rows, float("nan")
    rho, _ = spearmanr(distances, excess)
    return rows, float(rho)
