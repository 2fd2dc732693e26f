"""Shared temporal convolutional segment encoder.

Every variable row of every padded segment is encoded independently by the
same causal TCN and aggregated over its valid time steps into z ∈ R^{d_z}.
Causal padding keeps outputs at valid positions blind to the right padding.
"""

from typing import Literal

import numpy as np
import torch
import torch.nn.functional as F  # noqa: N812
from pydantic import BaseModel, ConfigDict, Field, field_validator
from torch import nn

from segcause.config.validators import validate_positive_integer
from segcause.data.types import EmbeddingOrigin, LatentEmbedding
from segcause.utils.constants import (
    DEFAULT_D_Z,
    DEFAULT_INPUT_PROJ_DIM,
    DEFAULT_TCN_CHANNELS,
    DEFAULT_TCN_DILATIONS,
    DEFAULT_TCN_KERNEL,
)
from segcause.utils.exceptions import DimensionMismatchError, InvariantViolationError


class TcnConfig(BaseModel):
    """Encoder architecture."""

    model_config = ConfigDict(frozen=True)

    input_proj_dim: int = Field(DEFAULT_INPUT_PROJ_DIM)
    channels: int = Field(DEFAULT_TCN_CHANNELS, description="Channels of every residual block")
    kernel_size: int = Field(DEFAULT_TCN_KERNEL)
    dilations: tuple[int, ...] = Field(DEFAULT_TCN_DILATIONS, description="One block per dilation")
    d_z: int = Field(DEFAULT_D_Z)
    aggregation: Literal["mean_over_time", "max_over_time"] = Field("mean_over_time")

    @field_validator("input_proj_dim", "channels", "d_z")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        return validate_positive_integer(v, info.field_name)

    @field_validator("kernel_size")
    @classmethod
    def _kernel(cls, v: int) -> int:
        if v < 2:
            raise ValueError("kernel_size must be at least 2")
        return v

    @field_validator("dilations")
    @classmethod
    def _dilations(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if not v:
            raise ValueError("at least one residual block is required")
        if any(d < 1 for d in v):
            raise ValueError("dilations must be positive")
        return tuple(v)

    @property
    def receptive_field(self) -> int:
        """Input steps visible to one output step (two convolutions per block)."""
        return 1 + sum(2 * (self.kernel_size - 1) * d for d in self.dilations)


class CausalConv1d(nn.Conv1d):
    """Conv1d padded on the left only, so y[t] depends on x[≤ t]."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, dilation: int):
        super().__init__(in_channels, out_channels, kernel_size, dilation=dilation)
        self.left_padding = (kernel_size - 1) * dilation

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return super().forward(F.pad(x, (self.left_padding, 0)))


class TemporalBlock(nn.Module):
    """Two dilated causal convolutions with ReLU and a residual connection."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, dilation: int):
        super().__init__()
        self.conv1 = CausalConv1d(in_channels, out_channels, kernel_size, dilation)
        self.conv2 = CausalConv1d(out_channels, out_channels, kernel_size, dilation)
        self.residual = (
            nn.Conv1d(in_channels, out_channels, 1) if in_channels != out_channels else None
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = torch.relu(self.conv1(x))
        out = self.conv2(out)
        skip = x if self.residual is None else self.residual(x)
        return torch.relu(out + skip)


class SegmentEncoder(nn.Module):
    """f_TCN shared across segments and variables (float64)."""

    def __init__(self, config: TcnConfig):
        super().__init__()
        self.config = config
        self.input_projection = nn.Conv1d(1, config.input_proj_dim, 1)
        blocks = []
        width = config.input_proj_dim
        for dilation in config.dilations:
            blocks.append(TemporalBlock(width, config.channels, config.kernel_size, dilation))
            width = config.channels
        self.blocks = nn.Sequential(*blocks)
        self.output_projection = nn.Conv1d(width, config.d_z, 1)
        self.double()

    @property
    def receptive_field(self) -> int:
        return self.config.receptive_field

    def forward(self, sequences: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        """Encode (S, T_max) rows, aggregating only their first ``lengths`` steps.

        Rows with length 0 (empty slots of a padded batch) come back as zeros.

        Returns:
            (S, d_z) embeddings
        """
        if sequences.dim() != 2:
            raise DimensionMismatchError(
                f"encoder expects (S, T_max) rows, got {tuple(sequences.shape)}", "T_max"
            )
        t_max = sequences.shape[1]
        features = self.output_projection(
            self.blocks(self.input_projection(sequences.unsqueeze(1)))
        )
        valid = torch.arange(t_max).unsqueeze(0) < lengths.unsqueeze(1)
        valid = valid.unsqueeze(1)
        if self.config.aggregation == "max_over_time":
            pooled = features.masked_fill(~valid, float("-inf")).amax(dim=-1)
        else:
            counts = lengths.clamp(min=1).to(features.dtype).unsqueeze(1)
            pooled = features.masked_fill(~valid, 0.0).sum(dim=-1) / counts
        empty = (lengths == 0).unsqueeze(1)
        return pooled.masked_fill(empty, 0.0)


def encode_segment(
    segment: np.ndarray, length: int, encoder: SegmentEncoder
) -> list[LatentEmbedding]:
    """Embed one padded segment, one vector per variable.

    Args:
        segment: Padded segment (N × T_max)
        length: Valid prefix length
        encoder: Shared encoder

    Returns:
        N segment embeddings of width d_z

    Raises:
        InvariantViolationError: If length is 0 or exceeds T_max
    """
    segment = np.asarray(segment, dtype=np.float64)
    if segment.ndim != 2:
        raise DimensionMismatchError(f"segment must be N×T_max, got {segment.shape}", "segment")
    if not 0 < length <= segment.shape[1]:
        raise InvariantViolationError(
            f"segment length must be in [1, {segment.shape[1]}], got {length}"
        )
    rows = torch.from_numpy(segment.copy())
    lengths = torch.full((segment.shape[0],), length, dtype=torch.int64)
    with torch.no_grad():
        vectors = encoder(rows, lengths).numpy()
    return [
        LatentEmbedding(vector, EmbeddingOrigin.SEGMENT, variable_index=n)
        for n, vector in enumerate(vectors)
    ]


def pattern_similarity(z_i: LatentEmbedding, z_j: LatentEmbedding) -> float:
    """Inner product of two embeddings.

    Raises:
        DimensionMismatchError: If the widths differ
    """
    if z_i.dim != z_j.dim:
        raise DimensionMismatchError(f"cannot compare d_z={z_i.dim} with d_z={z_j.dim}", "d_z")
    return float(np.dot(z_i.vector, z_j.vector))
