"""Full model: frozen reference → segmenter → encoder → spectral fusion → causal decoder.

The discrete steps (attention, boundaries, saliency, wavelet levels) are
collected once into a :class:`SegmentationPlan`; :meth:`SegCauseModel.forward`
is differentiable in the input with the plan held fixed.
"""

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, model_validator
from torch import nn

from segcause.data.types import AttentionMap, CausalMask, MaskSource, SegmentSet, TimeSeries
from segcause.model.batching import TaskKind, stack_values
from segcause.model.decoder import CausalDecoder, DecoderConfig
from segcause.model.encoder import SegmentEncoder, TcnConfig
from segcause.model.reference import ReferenceModelParams, instance_normalize_tensor
from segcause.model.segmenter import (
    SegmenterConfig,
    build_segments,
    max_segments,
    positional_encoding,
    segment_boundaries,
    segment_saliency,
)
from segcause.model.spectral import (
    SpectralConfig,
    SpectralFusion,
    dominant_frequency,
    max_level,
    select_level,
    series_features,
)
from segcause.utils.constants import CHECKPOINT_VERSION
from segcause.utils.exceptions import (
    ArtifactIOError,
    ConfigurationError,
    DimensionMismatchError,
    InvariantViolationError,
)
from segcause.utils.logging_config import get_logger
from segcause.utils.path_utils import PathLike

logger = get_logger(__name__)


class ModelConfig(BaseModel):
    """Architecture of the explainable model."""

    model_config = ConfigDict(frozen=True)

    n_variables: int = Field(..., description="Input variables N")
    task: TaskKind = Field("classification")
    segmenter: SegmenterConfig = Field(default_factory=SegmenterConfig)
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)
    encoder: TcnConfig = Field(default_factory=TcnConfig)
    decoder: Optional[DecoderConfig] = Field(None, description="None sizes it from l_max")

    @model_validator(mode="after")
    def _check_widths(self) -> "ModelConfig":
        if self.spectral.fusion_dim != self.encoder.d_z:
            raise ValueError(
                f"spectral fusion_dim ({self.spectral.fusion_dim}) must equal encoder d_z "
                f"({self.encoder.d_z})"
            )
        if self.decoder is None:
            object.__setattr__(
                self, "decoder", DecoderConfig(max_segments=max_segments(self.segmenter.l_max))
            )
        elif self.decoder.max_segments < max_segments(self.segmenter.l_max):
            raise ValueError(
                f"decoder max_segments ({self.decoder.max_segments}) is below the "
                f"{max_segments(self.segmenter.l_max)} segments l_max allows"
            )
        return self

    @property
    def n_slots(self) -> int:
        """Segment slots per sequence in a padded batch."""
        return max_segments(self.segmenter.l_max)


@dataclass
class SegmentationPlan:
    """Discrete segmentation decisions for a batch of B sequences."""

    boundaries: list[tuple[int, ...]]
    saliency: list[tuple[bool, ...]]
    attention: np.ndarray
    levels: np.ndarray
    t_max: int
    n_slots: int

    def __post_init__(self):
        if len(self.boundaries) != len(self.saliency) or len(self.boundaries) != len(self.levels):
            raise InvariantViolationError("plan entries disagree on the batch size")
        for bounds in self.boundaries:
            if len(bounds) - 1 > self.n_slots:
                raise InvariantViolationError(
                    f"{len(bounds) - 1} segments exceed the {self.n_slots} available slots"
                )
            longest = max(b - a for a, b in zip(bounds, bounds[1:]))
            if longest > self.t_max:
                raise InvariantViolationError(
                    f"segment of length {longest} exceeds T_max={self.t_max}"
                )

    @property
    def batch_size(self) -> int:
        return len(self.boundaries)

    @property
    def length(self) -> int:
        return int(self.attention.shape[2])

    def subset(self, index: Union[Sequence[int], torch.Tensor, np.ndarray]) -> "SegmentationPlan":
        """Plan restricted to the given batch rows (in that order)."""
        rows = [int(i) for i in np.asarray(index).reshape(-1)]
        return SegmentationPlan(
            boundaries=[self.boundaries[i] for i in rows],
            saliency=[self.saliency[i] for i in rows],
            attention=self.attention[rows],
            levels=self.levels[rows],
            t_max=self.t_max,
            n_slots=self.n_slots,
        )

    @cached_property
    def segment_lengths(self) -> torch.Tensor:
        """(B, S) valid lengths; 0 for empty slots."""
        lengths = torch.zeros(self.batch_size, self.n_slots, dtype=torch.int64)
        for b, bounds in enumerate(self.boundaries):
            for k, (start, end) in enumerate(zip(bounds, bounds[1:])):
                lengths[b, k] = end - start
        return lengths

    @cached_property
    def segment_mask(self) -> torch.Tensor:
        """(B, S) True on real segments."""
        return self.segment_lengths > 0

    @cached_property
    def salient(self) -> torch.Tensor:
        """(B, S) saliency flags, False on empty slots."""
        flags = torch.zeros(self.batch_size, self.n_slots, dtype=torch.bool)
        for b, row in enumerate(self.saliency):
            flags[b, : len(row)] = torch.tensor(row, dtype=torch.bool)
        return flags

    @cached_property
    def gather_index(self) -> tuple[torch.Tensor, torch.Tensor]:
        """(B, S, T_max) time indices into the full series plus the valid-time mask."""
        index = torch.zeros(self.batch_size, self.n_slots, self.t_max, dtype=torch.int64)
        starts = torch.zeros(self.batch_size, self.n_slots, 1, dtype=torch.int64)
        for b, bounds in enumerate(self.boundaries):
            for k, start in enumerate(bounds[:-1]):
                starts[b, k, 0] = start
        offsets = torch.arange(self.t_max).view(1, 1, -1)
        valid = offsets < self.segment_lengths.unsqueeze(-1)
        index = torch.where(valid, starts + offsets, index)
        return index, valid

    @cached_property
    def levels_tensor(self) -> torch.Tensor:
        return torch.as_tensor(self.levels, dtype=torch.int64)


@dataclass
class ModelOutput:
    """Forward pass results for a batch."""

    predictions: torch.Tensor
    embeddings: torch.Tensor
    fused: torch.Tensor
    segment_mask: torch.Tensor
    salient: torch.Tensor


class SegCauseModel(nn.Module):
    """Segment-level explainable predictor with a fixed causal mask."""

    def __init__(self, config: ModelConfig, mask: CausalMask, reference: ReferenceModelParams):
        super().__init__()
        if reference.config.n_variables != config.n_variables:
            raise DimensionMismatchError(
                f"reference model has N={reference.config.n_variables}, model config has "
                f"N={config.n_variables}",
                "n_variables",
            )
        if mask.n_variables != config.n_variables:
            raise DimensionMismatchError(
                f"causal mask has N={mask.n_variables}, model config has N={config.n_variables}",
                "n_variables",
            )
        self.config = config
        self.causal_mask = mask
        # plain attribute: the reference stays outside parameters() and state_dict()
        self.reference = reference
        self.encoder = SegmentEncoder(config.encoder)
        self.fusion = SpectralFusion(config.spectral)
        self.decoder = CausalDecoder(mask, config.encoder.d_z, config.decoder)

    @property
    def n_outputs(self) -> int:
        return self.decoder.n_outputs

    def attention(self, x: torch.Tensor) -> np.ndarray:
        """Reference attention (B, N, T) for raw inputs."""
        with torch.no_grad():
            return self.reference.build().attention(x).numpy()

    def plan(
        self, x: torch.Tensor, sampling_rate_hz: Union[float, Sequence[float]] = 1.0
    ) -> SegmentationPlan:
        """Compute the discrete segmentation for a (B, N, T) batch."""
        x = torch.as_tensor(x, dtype=torch.float64)
        if x.dim() != 3 or x.shape[1] != self.config.n_variables:
            raise DimensionMismatchError(
                f"expected (B, {self.config.n_variables}, T) inputs, got {tuple(x.shape)}",
                "n_variables",
            )
        batch, n_variables, length = x.shape
        rates = (
            [float(sampling_rate_hz)] * batch
            if isinstance(sampling_rate_hz, (int, float))
            else [float(r) for r in sampling_rate_hz]
        )
        cfg = self.config.segmenter
        attention = self.attention(x)
        with torch.no_grad():
            normalized = instance_normalize_tensor(x).numpy()

        deepest = max_level(length)
        threshold = cfg.resolve_threshold(length)
        boundaries, saliency = [], []
        levels = np.ones((batch, n_variables), dtype=np.int64)
        for b in range(batch):
            bounds = segment_boundaries(attention[b], cfg)
            boundaries.append(tuple(bounds))
            saliency.append(tuple(segment_saliency(attention[b], bounds, threshold)))
            for n in range(n_variables):
                f_d = dominant_frequency(normalized[b, n], rates[b]).frequency_hz
                level = select_level(rates[b], f_d, self.config.spectral.j_max)
                levels[b, n] = min(level, deepest)

        return SegmentationPlan(
            boundaries=boundaries,
            saliency=saliency,
            attention=attention,
            levels=levels,
            t_max=cfg.resolve_t_max(length),
            n_slots=self.config.n_slots,
        )

    def plan_series(self, series: list[TimeSeries]) -> SegmentationPlan:
        """Plan for a list of sequences, honouring each sampling rate."""
        return self.plan(stack_values(series), [s.sampling_rate_hz for s in series])

    def run(self, x: torch.Tensor, plan: SegmentationPlan) -> ModelOutput:
        """Differentiable pass at a fixed plan."""
        x = torch.as_tensor(x, dtype=torch.float64)
        batch, n_variables, length = x.shape
        if plan.batch_size != batch or plan.length != length:
            raise DimensionMismatchError(
                f"plan covers {plan.batch_size}×T={plan.length}, input is {batch}×T={length}",
                "plan",
            )
        normalized = instance_normalize_tensor(x)

        index, valid_time = plan.gather_index
        slots, t_max = index.shape[1], index.shape[2]
        expanded = normalized.unsqueeze(1).expand(batch, slots, n_variables, length)
        gather = index.unsqueeze(2).expand(batch, slots, n_variables, t_max)
        segments = expanded.gather(3, gather).masked_fill(~valid_time.unsqueeze(2), 0.0)

        cfg = self.config.segmenter
        if cfg.pos_encoding_scale > 0:
            encoding = torch.from_numpy(
                positional_encoding(n_variables, t_max, cfg.pos_encoding_scale)
            )
            slot_mask = plan.segment_mask.to(x.dtype).view(batch, slots, 1, 1)
            segments = segments + encoding * slot_mask

        lengths = plan.segment_lengths.unsqueeze(-1).expand(batch, slots, n_variables)
        z = self.encoder(segments.reshape(-1, t_max), lengths.reshape(-1))
        z = z.reshape(batch, slots, n_variables, -1)

        features = series_features(normalized, plan.levels_tensor, self.config.spectral)
        fused = self.fusion(features, z)
        fused = fused * plan.segment_mask.to(x.dtype).view(batch, slots, 1, 1)
        predictions = self.decoder(fused, plan.segment_mask)
        return ModelOutput(predictions, z, fused, plan.segment_mask, plan.salient)

    def forward(self, x: torch.Tensor, plan: Optional[SegmentationPlan] = None) -> torch.Tensor:
        """Predictions (B, D); the plan is computed from ``x`` when omitted."""
        if plan is None:
            plan = self.plan(x)
        return self.run(x, plan).predictions

    def predict(self, series: list[TimeSeries]) -> np.ndarray:
        """Predictions for sequences as a (B, D) array."""
        plan = self.plan_series(series)
        with torch.no_grad():
            return self.run(stack_values(series), plan).predictions.numpy()

    def segment_sets(self, series: list[TimeSeries]) -> list[SegmentSet]:
        """Materialized SegmentSets (normalized values) for inspection and export."""
        x = stack_values(series)
        plan = self.plan(x, [s.sampling_rate_hz for s in series])
        with torch.no_grad():
            normalized = instance_normalize_tensor(x).numpy()
        return [
            build_segments(
                normalized[b],
                list(plan.boundaries[b]),
                self.config.segmenter,
                AttentionMap(plan.attention[b]),
            )
            for b in range(len(series))
        ]

    def check_compatible(self, n_variables: int, n_outputs: Optional[int] = None) -> None:
        """Raise ConfigurationError naming the first dimension that disagrees."""
        if n_variables != self.config.n_variables:
            raise ConfigurationError(
                f"dimension mismatch: checkpoint has N={self.config.n_variables}, "
                f"data/config has N={n_variables}"
            )
        if n_outputs is not None and n_outputs != self.n_outputs:
            raise ConfigurationError(
                f"dimension mismatch: checkpoint has D={self.n_outputs}, "
                f"data/config has D={n_outputs}"
            )


@dataclass
class Checkpoint:
    """Everything needed to rebuild and resume a trained model."""

    model: SegCauseModel
    optimizer_state: Optional[dict] = None
    prototypes_state: Optional[dict] = None
    epoch: int = 0
    trace: list[dict[str, Any]] = field(default_factory=list)
    training_config: Optional[dict] = None


def save_checkpoint(path: PathLike, checkpoint: Checkpoint) -> None:
    """Write a versioned checkpoint with ``torch.save``."""
    model = checkpoint.model
    state = {
        "version": CHECKPOINT_VERSION,
        "config": model.config.model_dump(),
        "mask": {
            "entries": model.causal_mask.entries.tolist(),
            "source": model.causal_mask.source.value,
        },
        "weights": model.state_dict(),
        "reference": model.reference.to_state(),
        "optimizer": checkpoint.optimizer_state,
        "prototypes": checkpoint.prototypes_state,
        "epoch": checkpoint.epoch,
        "trace": checkpoint.trace,
        "training_config": checkpoint.training_config,
    }
    try:
        torch.save(state, Path(path))
    except OSError as e:
        raise ArtifactIOError(f"Cannot write checkpoint {path}: {e}") from e
    logger.debug(f"Checkpoint written: {path} (epoch {checkpoint.epoch})")


def load_checkpoint(path: PathLike) -> Checkpoint:
    """Rebuild a model (and its training state) from :func:`save_checkpoint` output.

    Raises:
        ArtifactIOError: If the file is missing, unreadable or of another version
    """
    path = Path(path)
    if not path.is_file():
        raise ArtifactIOError(f"Checkpoint not found: {path}")
    try:
        state = torch.load(path, weights_only=False)
    except Exception as e:
        raise ArtifactIOError(f"Cannot read checkpoint {path}: {e}") from e
    if not isinstance(state, dict) or state.get("version") != CHECKPOINT_VERSION:
        version = state.get("version") if isinstance(state, dict) else None
        raise ArtifactIOError(f"Unsupported checkpoint version in {path}: {version}")

    config = ModelConfig(**state["config"])
    mask = CausalMask(np.asarray(state["mask"]["entries"]), MaskSource(state["mask"]["source"]))
    reference = ReferenceModelParams.from_state(state["reference"])
    model = SegCauseModel(config, mask, reference)
    model.load_state_dict(state["weights"])
    return Checkpoint(
        model=model,
        optimizer_state=state.get("optimizer"),
        prototypes_state=state.get("prototypes"),
        epoch=int(state.get("epoch", 0)),
        trace=list(state.get("trace") or []),
        training_config=state.get("training_config"),
    )


def init_model(
    config: ModelConfig, mask: CausalMask, reference: ReferenceModelParams, seed: int
) -> SegCauseModel:
    """Seeded, untrained model."""
    torch.manual_seed(seed)
    return SegCauseModel(config, mask, reference)
