"""Immutable domain types shared by every stage of the pipeline.

All arrays are stored as read-only float64 (or bool/int) numpy arrays, so
instances can be shared across threads once constructed.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from segcause.utils.constants import ATTENTION_ROW_TOLERANCE, ATTRIBUTION_SUM_TOLERANCE
from segcause.utils.exceptions import (
    DimensionMismatchError,
    InvariantViolationError,
    NormalizationError,
)


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _first_non_finite(values: np.ndarray) -> Optional[tuple[int, ...]]:
    bad = np.argwhere(~np.isfinite(values))
    if bad.size == 0:
        return None
    return tuple(int(i) for i in bad[0])


class MaskSource(str, Enum):
    """Where a causal mask came from."""

    INGESTED = "ingested"
    GROUND_TRUTH_SCM = "ground_truth_scm"
    RANDOM = "random"
    PERTURBED = "perturbed"


class EmbeddingOrigin(str, Enum):
    """Which stage produced a latent embedding."""

    SEGMENT = "segment"
    HIGH_AGG = "high_agg"
    LOW_AGG = "low_agg"
    PROTOTYPE = "prototype"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A multivariate sequence X with N variables and T time steps."""

    values: np.ndarray
    sampling_rate_hz: float = 1.0
    label: Optional[int] = None
    targets: Optional[np.ndarray] = None
    id: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvariantViolationError(
                f"values must be an N×T matrix, got shape {values.shape}", self.id
            )
        n_variables, length = values.shape
        if n_variables < 1 or length < 2:
            raise InvariantViolationError(
                f"need N ≥ 1 and T ≥ 2, got N={n_variables}, T={length}", self.id
            )
        bad = _first_non_finite(values)
        if bad is not None:
            raise InvariantViolationError(
                f"non-finite value at variable {bad[0]}, t={bad[1]}", self.id
            )
        if not np.isfinite(self.sampling_rate_hz) or self.sampling_rate_hz <= 0:
            raise InvariantViolationError(
                f"sampling_rate_hz must be positive, got {self.sampling_rate_hz}", self.id
            )

        object.__setattr__(self, "values", _frozen_array(values))
        object.__setattr__(self, "sampling_rate_hz", float(self.sampling_rate_hz))
        if self.label is not None:
            object.__setattr__(self, "label", int(self.label))
        if self.targets is not None:
            targets = np.array(self.targets, dtype=np.float64).reshape(-1)
            bad = _first_non_finite(targets)
            if bad is not None:
                raise InvariantViolationError(f"non-finite target at index {bad[0]}", self.id)
            object.__setattr__(self, "targets", _frozen_array(targets))

    @property
    def n_variables(self) -> int:
        return int(self.values.shape[0])

    @property
    def length(self) -> int:
        return int(self.values.shape[1])

    def with_values(self, values: np.ndarray) -> "TimeSeries":
        """Return a copy carrying new values but the same metadata."""
        return TimeSeries(
            values=values,
            sampling_rate_hz=self.sampling_rate_hz,
            label=self.label,
            targets=self.targets,
            id=self.id,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        same_targets = (self.targets is None and other.targets is None) or (
            self.targets is not None
            and other.targets is not None
            and np.array_equal(self.targets, other.targets)
        )
        return (
            self.id == other.id
            and self.label == other.label
            and self.sampling_rate_hz == other.sampling_rate_hz
            and np.array_equal(self.values, other.values)
            and same_targets
        )

    def __repr__(self) -> str:
        return (
            f"TimeSeries(id={self.id!r}, shape={self.values.shape}, "
            f"fs={self.sampling_rate_hz}, label={self.label})"
        )


@dataclass(frozen=True, eq=False)
class AttentionMap:
    """Per-variable softmax attention over time, A ∈ R^{N×T}."""

    scores: np.ndarray

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64)
        if scores.ndim != 2:
            raise InvariantViolationError(f"attention must be N×T, got shape {scores.shape}")
        if _first_non_finite(scores) is not None:
            raise InvariantViolationError("attention contains non-finite scores")
        if scores.min() < 0.0 or scores.max() > 1.0:
            raise InvariantViolationError("attention scores must lie in [0, 1]")
        row_sums = scores.sum(axis=1)
        worst = float(np.max(np.abs(row_sums - 1.0)))
        if worst > ATTENTION_ROW_TOLERANCE:
            raise InvariantViolationError(f"attention rows must sum to 1 (max error {worst:.2e})")
        object.__setattr__(self, "scores", _frozen_array(scores))

    @property
    def n_variables(self) -> int:
        return int(self.scores.shape[0])

    @property
    def length(self) -> int:
        return int(self.scores.shape[1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttentionMap):
            return NotImplemented
        return np.array_equal(self.scores, other.scores)


@dataclass(frozen=True, eq=False)
class SegmentSet:
    """Attention-derived segmentation of one series.

    ``padded_segments`` has shape L×N×T_max; segment k occupies the first
    ``original_lengths[k]`` positions, the rest is zero padding (plus the
    positional encoding when one was applied).
    """

    boundaries: tuple[int, ...]
    padded_segments: np.ndarray
    original_lengths: tuple[int, ...]
    saliency_flags: tuple[bool, ...]
    positional_encoding_applied: bool = False
    l_max: Optional[int] = None

    def __post_init__(self):
        boundaries = tuple(int(b) for b in self.boundaries)
        lengths = tuple(int(n) for n in self.original_lengths)
        flags = tuple(bool(f) for f in self.saliency_flags)
        padded = np.array(self.padded_segments, dtype=np.float64)

        if len(boundaries) < 2 or boundaries[0] != 0:
            raise InvariantViolationError(f"boundaries must start at 0: {boundaries}")
        if any(b <= a for a, b in zip(boundaries, boundaries[1:])):
            raise InvariantViolationError(f"boundaries must be strictly increasing: {boundaries}")

        n_segments = len(boundaries) - 1
        if padded.ndim != 3 or padded.shape[0] != n_segments:
            raise InvariantViolationError(
                f"padded_segments must be L×N×T_max with L={n_segments}, got {padded.shape}"
            )
        if len(lengths) != n_segments or len(flags) != n_segments:
            raise InvariantViolationError(
                "lengths and saliency flags must have one entry per segment"
            )
        expected = tuple(b - a for a, b in zip(boundaries, boundaries[1:]))
        if lengths != expected:
            raise InvariantViolationError(f"original_lengths {lengths} do not match boundaries")
        if max(lengths) > padded.shape[2]:
            raise InvariantViolationError(
                f"segment of length {max(lengths)} exceeds T_max={padded.shape[2]}"
            )
        if self.l_max is not None and n_segments > self.l_max:
            raise InvariantViolationError(f"{n_segments} segments exceed L_max={self.l_max}")

        object.__setattr__(self, "boundaries", boundaries)
        object.__setattr__(self, "original_lengths", lengths)
        object.__setattr__(self, "saliency_flags", flags)
        object.__setattr__(self, "padded_segments", _frozen_array(padded))

    @property
    def n_segments(self) -> int:
        return len(self.boundaries) - 1

    @property
    def length(self) -> int:
        return self.boundaries[-1]

    @property
    def t_max(self) -> int:
        return int(self.padded_segments.shape[2])

    def unpadded(self, k: int) -> np.ndarray:
        """Return segment k without its right padding (N×T_k)."""
        return self.padded_segments[k, :, : self.original_lengths[k]]

    def concatenate(self) -> np.ndarray:
        """Stitch the un-padded segments back into an N×T matrix."""
        return np.concatenate([self.unpadded(k) for k in range(self.n_segments)], axis=1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SegmentSet):
            return NotImplemented
        return (
            self.boundaries == other.boundaries
            and self.original_lengths == other.original_lengths
            and self.saliency_flags == other.saliency_flags
            and self.positional_encoding_applied == other.positional_encoding_applied
            and self.l_max == other.l_max
            and np.array_equal(self.padded_segments, other.padded_segments)
        )


@dataclass(frozen=True, eq=False)
class CausalMask:
    """Binary D×N matrix mapping each output to its causal parent variables."""

    entries: np.ndarray
    source: MaskSource = MaskSource.INGESTED

    def __post_init__(self):
        entries = np.array(self.entries)
        if entries.ndim != 2 or entries.size == 0:
            raise InvariantViolationError(
                f"mask must be a non-empty D×N matrix, got {entries.shape}"
            )
        if not np.isin(entries, (0, 1)).all():
            raise InvariantViolationError("mask entries must be 0 or 1")
        entries = entries.astype(np.int64)
        empty_rows = np.flatnonzero(entries.sum(axis=1) == 0)
        if empty_rows.size:
            raise InvariantViolationError(
                f"every output needs at least one parent; empty rows: {empty_rows.tolist()}"
            )
        object.__setattr__(self, "entries", _frozen_array(entries, dtype=np.int64))
        object.__setattr__(self, "source", MaskSource(self.source))

    @classmethod
    def full(cls, n_outputs: int, n_variables: int, source: MaskSource = MaskSource.INGESTED):
        """All-ones mask: every output sees every variable."""
        return cls(np.ones((n_outputs, n_variables), dtype=np.int64), source)

    @property
    def n_outputs(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n_variables(self) -> int:
        return int(self.entries.shape[1])

    def parents(self, output: int) -> list[int]:
        """Indices of the parent variables of one output."""
        return np.flatnonzero(self.entries[output]).tolist()

    def frobenius_distance_sq(self, other: "CausalMask") -> int:
        """Squared Frobenius distance ‖M−M'‖²_F (number of differing entries)."""
        if self.entries.shape != other.entries.shape:
            raise DimensionMismatchError(
                f"mask shapes differ: {self.entries.shape} vs {other.entries.shape}", "mask"
            )
        return int(np.sum((self.entries - other.entries) ** 2))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CausalMask):
            return NotImplemented
        return self.source == other.source and np.array_equal(self.entries, other.entries)

    def __repr__(self) -> str:
        return f"CausalMask(D={self.n_outputs}, N={self.n_variables}, source={self.source.value})"


@dataclass(frozen=True, eq=False)
class LatentEmbedding:
    """A d_z-dimensional latent vector tied to one input variable."""

    vector: np.ndarray
    origin: EmbeddingOrigin = EmbeddingOrigin.SEGMENT
    variable_index: int = 0

    def __post_init__(self):
        vector = np.array(self.vector, dtype=np.float64)
        if vector.ndim != 1 or vector.size == 0:
            raise InvariantViolationError(
                f"embedding must be a non-empty vector, got {vector.shape}"
            )
        if _first_non_finite(vector) is not None:
            raise InvariantViolationError("embedding contains non-finite entries")
        object.__setattr__(self, "vector", _frozen_array(vector))
        object.__setattr__(self, "origin", EmbeddingOrigin(self.origin))
        object.__setattr__(self, "variable_index", int(self.variable_index))

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatentEmbedding):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.variable_index == other.variable_index
            and np.array_equal(self.vector, other.vector)
        )


@dataclass(frozen=True)
class DegradationEntry:
    """Metric value before and after masking."""

    before: float
    after: float
    delta_percent: float

    @classmethod
    def from_scores(cls, before: float, after: float) -> "DegradationEntry":
        if before == 0:
            raise InvariantViolationError("delta_percent is undefined for a zero baseline metric")
        return cls(float(before), float(after), 100.0 * (after - before) / before)


@dataclass(frozen=True)
class LipschitzSample:
    """One row of the Lipschitz probe: noise level and mean norms."""

    sigma: float
    input_delta_norm: float
    output_delta_norm: float
    ratio: float


@dataclass(frozen=True, eq=False)
class ExplanationReport:
    """Attribution map plus the evaluation statistics of one experiment."""

    attribution: np.ndarray
    degradation: dict[str, DegradationEntry] = field(default_factory=dict)
    stability: Optional[float] = None
    lipschitz_samples: tuple[LipschitzSample, ...] = ()
    runtime: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        attribution = np.array(self.attribution, dtype=np.float64)
        if attribution.ndim != 2:
            raise NormalizationError(f"attribution must be N×T, got shape {attribution.shape}")
        if _first_non_finite(attribution) is not None or attribution.min() < 0:
            raise NormalizationError("attribution entries must be finite and non-negative")
        total = float(attribution.sum())
        if abs(total - 1.0) > ATTRIBUTION_SUM_TOLERANCE:
            raise NormalizationError(f"attribution must sum to 1, got {total!r}")

        for metric, entry in self.degradation.items():
            if entry.before == 0:
                raise InvariantViolationError(f"{metric}: zero baseline metric")
            expected = 100.0 * (entry.after - entry.before) / entry.before
            if not np.isclose(entry.delta_percent, expected, rtol=1e-12, atol=1e-12):
                raise InvariantViolationError(
                    f"{metric}: delta_percent {entry.delta_percent} != {expected}"
                )
        if self.stability is not None and not self.stability >= 0:
            raise InvariantViolationError(f"stability must be ≥ 0, got {self.stability}")

        object.__setattr__(self, "attribution", _frozen_array(attribution))
        object.__setattr__(self, "degradation", dict(self.degradation))
        object.__setattr__(self, "lipschitz_samples", tuple(self.lipschitz_samples))
        object.__setattr__(
            self, "runtime", {int(k): float(v) for k, v in sorted(self.runtime.items())}
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExplanationReport):
            return NotImplemented
        return (
            np.array_equal(self.attribution, other.attribution)
            and self.degradation == other.degradation
            and self.stability == other.stability
            and self.lipschitz_samples == other.lipschitz_samples
            and self.runtime == other.runtime
        )
