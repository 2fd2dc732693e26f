"""Attention-guided segmentation.

Pipeline per sequence: max-pool each attention row, average the pooled rows
across variables, place boundaries where the pooled attention jumps, keep the
``L_max - 2`` strongest interior boundaries, then cut, pad and tag segments.
"""

from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.ndimage import maximum_filter1d

from segcause.config.validators import (
    validate_closed_unit_interval,
    validate_non_negative_real,
    validate_odd_kernel,
    validate_positive_integer,
)
from segcause.data.types import AttentionMap, SegmentSet, TimeSeries
from segcause.utils.constants import (
    DEFAULT_CHANGEPOINT_QUANTILE,
    DEFAULT_L_MAX,
    DEFAULT_POOL_KERNEL,
    DEFAULT_POS_ENCODING_SCALE,
    POS_ENCODING_BASE,
)
from segcause.utils.exceptions import ConfigurationError, InvariantViolationError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)


class SegmenterConfig(BaseModel):
    """Segmentation hyperparameters."""

    model_config = ConfigDict(frozen=True)

    pool_kernel: int = Field(DEFAULT_POOL_KERNEL, description="Odd max-pooling window")
    changepoint_quantile: float = Field(
        DEFAULT_CHANGEPOINT_QUANTILE, description="Quantile of |Δa| used as boundary threshold"
    )
    l_max: int = Field(DEFAULT_L_MAX, description="Segment budget L_max (≥ 2)")
    t_max: Optional[int] = Field(None, description="Padded segment length; None uses T")
    saliency_threshold: Union[float, str] = Field(
        "mean", description="Salient if segment mean attention exceeds this ('mean' = 1/T)"
    )
    pos_encoding_scale: float = Field(
        DEFAULT_POS_ENCODING_SCALE, description="Amplitude of the sinusoidal encoding"
    )
    use_pruning: bool = Field(
        True, description="Rank boundaries by Δ; when off keep the earliest L_max-2"
    )

    @field_validator("pool_kernel")
    @classmethod
    def _kernel(cls, v: int) -> int:
        return validate_odd_kernel(v, "pool_kernel")

    @field_validator("changepoint_quantile")
    @classmethod
    def _quantile(cls, v: float) -> float:
        return validate_closed_unit_interval(v, "changepoint_quantile")

    @field_validator("l_max")
    @classmethod
    def _l_max(cls, v: int) -> int:
        v = validate_positive_integer(v, "l_max")
        if v < 2:
            raise ValueError("l_max must be at least 2")
        return v

    @field_validator("t_max")
    @classmethod
    def _t_max(cls, v: Optional[int]) -> Optional[int]:
        return None if v is None else validate_positive_integer(v, "t_max")

    @field_validator("saliency_threshold")
    @classmethod
    def _threshold(cls, v):
        if isinstance(v, str):
            if v.strip().lower() == "mean":
                return "mean"
            v = float(v)
        value = float(v)
        if not 0.0 < value < 1.0:
            raise ValueError("saliency_threshold must be in (0, 1) or 'mean'")
        return value

    @field_validator("pos_encoding_scale")
    @classmethod
    def _scale(cls, v: float) -> float:
        return validate_non_negative_real(v, "pos_encoding_scale")

    def resolve_t_max(self, length: int) -> int:
        """Padded length for sequences of length T."""
        return self.t_max if self.t_max is not None else length

    def resolve_threshold(self, length: int) -> float:
        """Numeric saliency threshold for sequences of length T."""
        return 1.0 / length if self.saliency_threshold == "mean" else float(self.saliency_threshold)


def pool_attention(a_row: np.ndarray, kernel: int) -> np.ndarray:
    """Centered max pooling with truncated edge windows.

    Raises:
        ConfigurationError: If kernel is even, non-positive or longer than the row
    """
    a_row = np.asarray(a_row, dtype=np.float64)
    if kernel < 1 or kernel % 2 == 0:
        raise ConfigurationError(f"pool kernel must be odd and positive, got {kernel}")
    if kernel > a_row.shape[0]:
        raise ConfigurationError(f"pool kernel {kernel} exceeds sequence length {a_row.shape[0]}")
    # 'nearest' repeats edge values, which leaves the max of a truncated window unchanged
    return maximum_filter1d(a_row, size=kernel, mode="nearest")


def detect_changepoints(
    a_pooled: np.ndarray, quantile: float, threshold: Optional[float] = None
) -> list[int]:
    """Boundaries where the pooled attention jumps.

    Interior index b is a boundary when |a[b] − a[b−1]| is positive and at
    least the ``quantile`` of all first differences (or ``threshold`` when
    given explicitly).

    Returns:
        Sorted boundaries including 0 and T
    """
    a_pooled = np.asarray(a_pooled, dtype=np.float64)
    length = a_pooled.shape[0]
    if length < 2:
        raise InvariantViolationError(f"need T ≥ 2 to detect change points, got {length}")
    jumps = np.abs(np.diff(a_pooled))
    if threshold is None:
        threshold = float(np.quantile(jumps, quantile))
    interior = [b for b in range(1, length) if jumps[b - 1] > 0 and jumps[b - 1] >= threshold]
    return [0, *interior, length]


def prune_boundaries(
    boundaries: list[int], a_pooled: np.ndarray, l_max: int, rank_by_change: bool = True
) -> list[int]:
    """Keep the ``l_max - 2`` interior boundaries with the largest change.

    Δ_j = |a[b_j] − a[b_{j−1}]| with b_{j−1} the preceding boundary; ties keep
    the earlier boundary. With ``rank_by_change`` off the earliest interior
    boundaries are kept instead.

    Raises:
        ConfigurationError: If l_max < 2
    """
    if l_max < 2:
        raise ConfigurationError(f"L_max must be at least 2, got {l_max}")
    a_pooled = np.asarray(a_pooled, dtype=np.float64)
    boundaries = sorted(int(b) for b in boundaries)
    interior = boundaries[1:-1]
    budget = l_max - 2
    if len(interior) <= budget:
        return boundaries

    if rank_by_change:
        deltas = [abs(a_pooled[b] - a_pooled[prev]) for prev, b in zip(boundaries, interior)]
        ranked = sorted(range(len(interior)), key=lambda j: (-deltas[j], interior[j]))
        kept = sorted(interior[j] for j in ranked[:budget])
    else:
        kept = interior[:budget]
    return [boundaries[0], *kept, boundaries[-1]]


def positional_encoding(n_variables: int, t_max: int, scale: float) -> np.ndarray:
    """Sinusoidal encoding E_pos ∈ R^{N×T_max} over segment-local positions.

    Row i uses sin for even i and cos for odd i at frequency
    1 / base^(2⌊i/2⌋ / N), scaled by ``scale``.
    """
    positions = np.arange(t_max, dtype=np.float64)
    encoding = np.zeros((n_variables, t_max))
    for i in range(n_variables):
        rate = 1.0 / POS_ENCODING_BASE ** (2 * (i // 2) / max(n_variables, 1))
        encoding[i] = np.sin(positions * rate) if i % 2 == 0 else np.cos(positions * rate)
    return scale * encoding


def segment_saliency(
    attention: np.ndarray, boundaries: list[int], threshold: float
) -> list[bool]:
    """Salient flag per segment: mean attention over the span (all variables) > threshold."""
    attention = np.asarray(attention, dtype=np.float64)
    return [
        bool(attention[:, start:end].mean() > threshold)
        for start, end in zip(boundaries, boundaries[1:])
    ]


def build_segments(
    x: Union[TimeSeries, np.ndarray],
    boundaries: list[int],
    cfg: SegmenterConfig,
    a: AttentionMap,
) -> SegmentSet:
    """Cut, right-pad and encode segments, and tag their saliency.

    Args:
        x: Series (or its normalized N×T values) to cut
        boundaries: Pruned boundaries b_0=0 < … < b_L=T
        cfg: Segmenter configuration
        a: Attention map used for saliency tagging

    Raises:
        InvariantViolationError: If a segment is longer than T_max or shapes disagree
    """
    values = np.asarray(x.values if isinstance(x, TimeSeries) else x, dtype=np.float64)
    n_variables, length = values.shape
    if a.scores.shape != values.shape:
        raise InvariantViolationError(
            f"attention shape {a.scores.shape} does not match series shape {values.shape}"
        )
    if boundaries[0] != 0 or boundaries[-1] != length:
        raise InvariantViolationError(f"boundaries must span [0, {length}]: {boundaries}")

    t_max = cfg.resolve_t_max(length)
    lengths = [end - start for start, end in zip(boundaries, boundaries[1:])]
    if max(lengths) > t_max:
        raise InvariantViolationError(f"segment of length {max(lengths)} exceeds T_max={t_max}")

    encoding = positional_encoding(n_variables, t_max, cfg.pos_encoding_scale)
    padded = np.zeros((len(lengths), n_variables, t_max))
    for k, (start, end) in enumerate(zip(boundaries, boundaries[1:])):
        padded[k, :, : end - start] = values[:, start:end]
        if cfg.pos_encoding_scale > 0:
            padded[k] += encoding

    flags = segment_saliency(a.scores, boundaries, cfg.resolve_threshold(length))
    return SegmentSet(
        boundaries=tuple(boundaries),
        padded_segments=padded,
        original_lengths=tuple(lengths),
        saliency_flags=tuple(flags),
        positional_encoding_applied=cfg.pos_encoding_scale > 0,
        l_max=cfg.l_max,
    )


def segment_boundaries(attention: np.ndarray, cfg: SegmenterConfig) -> list[int]:
    """Pool, average across variables, detect and prune: the full boundary rule."""
    attention = np.asarray(attention, dtype=np.float64)
    kernel = min(cfg.pool_kernel, _largest_odd(attention.shape[1]))
    pooled = np.stack([pool_attention(row, kernel) for row in attention]).mean(axis=0)
    detected = detect_changepoints(pooled, cfg.changepoint_quantile)
    return prune_boundaries(detected, pooled, cfg.l_max, rank_by_change=cfg.use_pruning)


def segment_series(
    x: TimeSeries, normalized: np.ndarray, attention: AttentionMap, cfg: SegmenterConfig
) -> SegmentSet:
    """Segment one series end to end (boundaries from attention, values normalized)."""
    boundaries = segment_boundaries(attention.scores, cfg)
    segments = build_segments(normalized, boundaries, cfg, attention)
    logger.debug(
        f"{x.id}: {segments.n_segments} segments, "
        f"{sum(segments.saliency_flags)} salient, boundaries={list(segments.boundaries)}"
    )
    return segments


def max_segments(l_max: int) -> int:
    """Upper bound on segments produced under the literal pruning rule."""
    return max(1, l_max - 1)


def _largest_odd(length: int) -> int:
    return length if length % 2 == 1 else length - 1
