"""Pydantic document models for every file the pipeline reads or writes.

Each document mirrors one domain type and converts in both directions, so
the JSON layout is declared in exactly one place.
"""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from segcause.data.types import (
    AttentionMap,
    CausalMask,
    DegradationEntry,
    EmbeddingOrigin,
    ExplanationReport,
    LatentEmbedding,
    LipschitzSample,
    MaskSource,
    SegmentSet,
    TimeSeries,
)


class TimeSeriesDocument(BaseModel):
    """One sequence in the JSON dataset format."""

    id: str = Field(..., description="Sequence identifier")
    values: list[list[float]] = Field(..., description="N rows of T values")
    sampling_rate_hz: float = Field(1.0, description="Sampling rate f_s in Hz")
    label: Optional[int] = Field(None, description="Per-sequence class index")
    targets: Optional[list[float]] = Field(None, description="Regression targets (length D)")

    @classmethod
    def from_domain(cls, series: TimeSeries) -> "TimeSeriesDocument":
        return cls(
            id=series.id,
            values=series.values.tolist(),
            sampling_rate_hz=series.sampling_rate_hz,
            label=series.label,
            targets=None if series.targets is None else series.targets.tolist(),
        )

    def to_domain(self) -> TimeSeries:
        return TimeSeries(
            values=np.asarray(self.values, dtype=np.float64),
            sampling_rate_hz=self.sampling_rate_hz,
            label=self.label,
            targets=None if self.targets is None else np.asarray(self.targets),
            id=self.id,
        )


class SidecarEntry(BaseModel):
    """Labels/targets for one sequence of a CSV dataset."""

    label: Optional[int] = Field(None, description="Per-sequence class index")
    targets: Optional[list[float]] = Field(None, description="Regression targets")
    sampling_rate_hz: Optional[float] = Field(None, description="Overrides the default f_s")


class AttentionMapDocument(BaseModel):
    """Serialized attention map."""

    scores: list[list[float]] = Field(..., description="N×T softmax attention")

    @classmethod
    def from_domain(cls, attention: AttentionMap) -> "AttentionMapDocument":
        return cls(scores=attention.scores.tolist())

    def to_domain(self) -> AttentionMap:
        return AttentionMap(np.asarray(self.scores, dtype=np.float64))


class SegmentSetDocument(BaseModel):
    """Serialized segmentation, also used for inspection dumps."""

    boundaries: list[int] = Field(..., description="b_0=0 < ... < b_L=T")
    saliency_flags: list[bool] = Field(..., description="Salient (true) or background segment")
    original_lengths: list[int] = Field(..., description="Un-padded length of each segment")
    padded_segments: Optional[list[list[list[float]]]] = Field(
        None, description="L×N×T_max padded tensor (omitted in inspection dumps)"
    )
    positional_encoding_applied: bool = Field(False, description="Whether E_pos was added")
    l_max: Optional[int] = Field(None, description="Configured segment budget")

    @classmethod
    def from_domain(cls, segments: SegmentSet, include_tensor: bool = True) -> "SegmentSetDocument":
        return cls(
            boundaries=list(segments.boundaries),
            saliency_flags=list(segments.saliency_flags),
            original_lengths=list(segments.original_lengths),
            padded_segments=segments.padded_segments.tolist() if include_tensor else None,
            positional_encoding_applied=segments.positional_encoding_applied,
            l_max=segments.l_max,
        )

    def to_domain(self) -> SegmentSet:
        if self.padded_segments is None:
            raise ValueError("segment dump has no padded tensor to restore")
        return SegmentSet(
            boundaries=tuple(self.boundaries),
            padded_segments=np.asarray(self.padded_segments, dtype=np.float64),
            original_lengths=tuple(self.original_lengths),
            saliency_flags=tuple(self.saliency_flags),
            positional_encoding_applied=self.positional_encoding_applied,
            l_max=self.l_max,
        )


class CausalMaskDocument(BaseModel):
    """Mask JSON: ``{"D": int, "N": int, "entries": [[0|1]]}``."""

    model_config = ConfigDict(populate_by_name=True)

    n_outputs: int = Field(..., alias="D", description="Number of outputs D")
    n_variables: int = Field(..., alias="N", description="Number of input variables N")
    entries: list[list[int]] = Field(..., description="Binary D×N matrix")
    source: Optional[str] = Field(None, description="Mask provenance")

    @classmethod
    def from_domain(cls, mask: CausalMask) -> "CausalMaskDocument":
        return cls(
            D=mask.n_outputs,
            N=mask.n_variables,
            entries=mask.entries.tolist(),
            source=mask.source.value,
        )

    def to_domain(self, default_source: MaskSource = MaskSource.INGESTED) -> CausalMask:
        entries = np.asarray(self.entries)
        if entries.shape != (self.n_outputs, self.n_variables):
            raise ValueError(
                f"mask entries have shape {entries.shape}, header says "
                f"D={self.n_outputs}, N={self.n_variables}"
            )
        source = MaskSource(self.source) if self.source else default_source
        return CausalMask(entries, source)

    def dump(self) -> dict[str, Any]:
        return self.model_dump(by_alias=True, exclude_none=True)


class LatentEmbeddingDocument(BaseModel):
    """Serialized latent embedding."""

    vector: list[float] = Field(..., description="d_z values")
    origin: str = Field(EmbeddingOrigin.SEGMENT.value, description="Producing stage")
    variable_index: int = Field(0, description="Input variable the embedding belongs to")

    @classmethod
    def from_domain(cls, embedding: LatentEmbedding) -> "LatentEmbeddingDocument":
        return cls(
            vector=embedding.vector.tolist(),
            origin=embedding.origin.value,
            variable_index=embedding.variable_index,
        )

    def to_domain(self) -> LatentEmbedding:
        return LatentEmbedding(
            np.asarray(self.vector), EmbeddingOrigin(self.origin), self.variable_index
        )


class DegradationDocument(BaseModel):
    """Metric before/after masking."""

    before: float = Field(..., description="Metric on unmasked inputs")
    after: float = Field(..., description="Metric after masking")
    delta_percent: float = Field(..., description="100·(after−before)/before")


class LipschitzDocument(BaseModel):
    """One Lipschitz probe row."""

    sigma: float
    input_delta_norm: float
    output_delta_norm: float
    ratio: float


class ReportDocument(BaseModel):
    """Report JSON written by ``evaluate``."""

    attribution: list[list[float]] = Field(..., description="Normalized N×T importance map")
    degradation: dict[str, DegradationDocument] = Field(default_factory=dict)
    stability: Optional[float] = Field(None, description="Coefficient of variation across seeds")
    lipschitz_samples: list[LipschitzDocument] = Field(default_factory=list)
    runtime: dict[str, float] = Field(default_factory=dict, description="T → milliseconds")

    @classmethod
    def from_domain(cls, report: ExplanationReport) -> "ReportDocument":
        return cls(
            attribution=report.attribution.tolist(),
            degradation={
                metric: DegradationDocument(
                    before=e.before, after=e.after, delta_percent=e.delta_percent
                )
                for metric, e in report.degradation.items()
            },
            stability=report.stability,
            lipschitz_samples=[
                LipschitzDocument(
                    sigma=s.sigma,
                    input_delta_norm=s.input_delta_norm,
                    output_delta_norm=s.output_delta_norm,
                    ratio=s.ratio,
                )
                for s in report.lipschitz_samples
            ],
            runtime={str(t): ms for t, ms in report.runtime.items()},
        )

    def to_domain(self) -> ExplanationReport:
        return ExplanationReport(
            attribution=np.asarray(self.attribution, dtype=np.float64),
            degradation={
                metric: DegradationEntry(e.before, e.after, e.delta_percent)
                for metric, e in self.degradation.items()
            },
            stability=self.stability,
            lipschitz_samples=tuple(
                LipschitzSample(s.sigma, s.input_delta_norm, s.output_delta_norm, s.ratio)
                for s in self.lipschitz_samples
            ),
            runtime={int(t): ms for t, ms in self.runtime.items()},
        )


class ManifestEntry(BaseModel):
    """One output file listed in a run manifest."""

    path: str = Field(..., description="Path relative to the output directory")
    kind: str = Field(..., description="Artifact kind (dataset, mask, checkpoint, table, ...)")


class ManifestDocument(BaseModel):
    """Manifest written into every command's output directory."""

    command: str = Field(..., description="CLI subcommand that produced the outputs")
    version: str = Field(..., description="segcause version")
    seeds: list[int] = Field(default_factory=list)
    outputs: list[ManifestEntry] = Field(default_factory=list)
    details: Optional[dict[str, Any]] = Field(None, description="Command-specific summary")
