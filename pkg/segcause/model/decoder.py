"""Causally masked multi-output decoder.

One independent branch per output j. Branch j only sees the variable slices
its mask row admits; masked slices are replaced by exact zeros before any
computation, so a non-parent variable has no path to ŷ_j.

Internal tensors use the (B, L, N, d_z) layout; the single-sequence helpers
(:func:`apply_mask`, :func:`decode_branch`, :func:`predict_all`) accept the
(d_z, L, N) layout of X''.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, field_validator
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from segcause.config.validators import validate_positive_integer
from segcause.data.types import CausalMask
from segcause.utils.constants import DEFAULT_L_MAX
from segcause.utils.exceptions import DimensionMismatchError, InvariantViolationError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)

ArrayLike = Union[np.ndarray, torch.Tensor]


class DecoderConfig(BaseModel):
    """Branch architecture shared by all outputs."""

    model_config = ConfigDict(frozen=True)

    lstm_hidden: int = Field(32, description="Hidden width per LSTM direction")
    max_segments: int = Field(DEFAULT_L_MAX, description="Largest L a branch accepts")
    use_causal_mask: bool = Field(True, description="Off decodes every branch unmasked")

    @field_validator("lstm_hidden", "max_segments")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        return validate_positive_integer(v, info.field_name)


class DecoderBranch(nn.Module):
    """Dec_j: BiLSTM over segments, attention pooling, channel gate, LayerNorm, head."""

    def __init__(self, n_variables: int, d_z: int, config: DecoderConfig):
        super().__init__()
        self.n_variables = n_variables
        self.d_z = d_z
        self.max_segments = config.max_segments
        width = 2 * config.lstm_hidden
        self.lstm = nn.LSTM(
            n_variables * d_z, config.lstm_hidden, batch_first=True, bidirectional=True
        )
        self.attention = nn.Linear(width, 1)
        self.gate = nn.Linear(d_z, 1)
        self.gate_projection = nn.Linear(n_variables * d_z, width)
        self.norm = nn.LayerNorm(width)
        self.head = nn.Linear(width, 1)
        self.double()

    def forward(self, x: torch.Tensor, segment_mask: torch.Tensor) -> torch.Tensor:
        """Predict ŷ_j for a masked batch.

        Args:
            x: (B, L, N, d_z) masked embeddings
            segment_mask: (B, L) bool, True on real segments (a prefix per row)

        Returns:
            (B,) predictions

        Raises:
            DimensionMismatchError: If L exceeds the branch capacity
        """
        batch, n_segments, n_variables, d_z = x.shape
        if n_segments > self.max_segments:
            raise DimensionMismatchError(
                f"{n_segments} segments exceed the branch capacity of {self.max_segments}", "L"
            )
        if (n_variables, d_z) != (self.n_variables, self.d_z):
            raise DimensionMismatchError(
                f"branch expects (N, d_z)=({self.n_variables}, {self.d_z}), got "
                f"({n_variables}, {d_z})",
                "n_variables",
            )
        lengths = segment_mask.sum(dim=1).clamp(min=1)
        flat = x.reshape(batch, n_segments, n_variables * d_z)

        packed = pack_padded_sequence(flat, lengths.cpu(), batch_first=True, enforce_sorted=False)
        states, _ = self.lstm(packed)
        states, _ = pad_packed_sequence(states, batch_first=True, total_length=n_segments)

        scores = self.attention(states).squeeze(-1).masked_fill(~segment_mask, float("-inf"))
        weights = torch.softmax(scores, dim=1)
        pooled = (weights.unsqueeze(-1) * states).sum(dim=1)

        valid = segment_mask.unsqueeze(-1).unsqueeze(-1).to(x.dtype)
        per_variable = (x * valid).sum(dim=1) / lengths.to(x.dtype).view(batch, 1, 1)
        gate = torch.sigmoid(self.gate(per_variable))
        gated = self.gate_projection((gate * per_variable).reshape(batch, n_variables * d_z))

        hidden = self.norm(pooled + gated)
        return self.head(hidden).squeeze(-1)


class CausalDecoder(nn.Module):
    """D independent branches under a fixed binary mask M ∈ {0,1}^{D×N}."""

    def __init__(self, mask: CausalMask, d_z: int, config: DecoderConfig):
        super().__init__()
        self.config = config
        self.d_z = d_z
        self.branches = nn.ModuleList(
            DecoderBranch(mask.n_variables, d_z, config) for _ in range(mask.n_outputs)
        )
        entries = torch.from_numpy(mask.entries.astype(bool))
        if not config.use_causal_mask:
            entries = torch.ones_like(entries)
        self.register_buffer("mask", entries)

    @property
    def n_outputs(self) -> int:
        return len(self.branches)

    @property
    def n_variables(self) -> int:
        return int(self.mask.shape[1])

    def forward(self, x: torch.Tensor, segment_mask: torch.Tensor) -> torch.Tensor:
        """(B, L, N, d_z) embeddings to (B, D) predictions."""
        if x.shape[2] != self.n_variables:
            raise DimensionMismatchError(
                f"decoder mask has N={self.n_variables}, embeddings have N={x.shape[2]}",
                "n_variables",
            )
        outputs = []
        for j, branch in enumerate(self.branches):
            dropped = ~self.mask[j].view(1, 1, -1, 1)
            outputs.append(branch(x.masked_fill(dropped, 0.0), segment_mask))
        return torch.stack(outputs, dim=1)


def apply_mask(x_pp: ArrayLike, mask_row: ArrayLike) -> ArrayLike:
    """Zero the variable slices of X'' (d_z × L × N) whose mask entry is 0.

    Raises:
        InvariantViolationError: If the row admits no variable
        DimensionMismatchError: If the row length differs from N
    """
    is_numpy = isinstance(x_pp, np.ndarray)
    tensor = torch.as_tensor(x_pp)
    row = torch.as_tensor(np.asarray(mask_row)).to(torch.bool)
    if row.shape != (tensor.shape[-1],):
        raise DimensionMismatchError(
            f"mask row has {tuple(row.shape)} entries, X'' has N={tensor.shape[-1]}", "n_variables"
        )
    if not row.any():
        raise InvariantViolationError("mask row is empty; every output needs at least one parent")
    masked = tensor.masked_fill(~row.view(1, 1, -1), 0.0)
    return masked.numpy() if is_numpy else masked


def decode_branch(
    x_masked: torch.Tensor, branch: DecoderBranch, n_segments: Optional[int] = None
) -> torch.Tensor:
    """Decode one sequence's masked X'' (d_z × L × N) with one branch.

    Args:
        x_masked: Masked embeddings
        branch: Output branch
        n_segments: Valid segments L (defaults to all of them)

    Returns:
        Scalar prediction ŷ_j
    """
    x_masked = torch.as_tensor(x_masked, dtype=torch.float64)
    total = x_masked.shape[1]
    n_segments = total if n_segments is None else n_segments
    if not 1 <= n_segments <= total:
        raise InvariantViolationError(f"segment count must be in [1, {total}], got {n_segments}")
    batch = x_masked.permute(1, 2, 0).unsqueeze(0)
    segment_mask = (torch.arange(total) < n_segments).unsqueeze(0)
    return branch(batch, segment_mask)[0]


def predict_all(
    x_pp: torch.Tensor,
    mask: CausalMask,
    branches: Union[CausalDecoder, list[DecoderBranch], nn.ModuleList],
    n_segments: Optional[int] = None,
) -> torch.Tensor:
    """ŷ = [Dec_1(X''⊙M_1), …, Dec_D(X''⊙M_D)] for one sequence.

    Raises:
        DimensionMismatchError: If the number of branches differs from D
    """
    if isinstance(branches, CausalDecoder):
        branches = branches.branches
    if len(branches) != mask.n_outputs:
        raise DimensionMismatchError(
            f"{len(branches)} branches for a mask with D={mask.n_outputs}", "D"
        )
    x_pp = torch.as_tensor(x_pp, dtype=torch.float64)
    return torch.stack(
        [
            decode_branch(apply_mask(x_pp, mask.entries[j]), branch, n_segments)
            for j, branch in enumerate(branches)
        ]
    )


@dataclass(frozen=True)
class SaliencyAggregate:
    """Per-variable means of salient (high) and background (low) embeddings."""

    high: np.ndarray
    low: np.ndarray
    high_empty: bool = False
    low_empty: bool = False


def aggregate_saliency(embeddings: ArrayLike, flags: list[bool]) -> SaliencyAggregate:
    """Split segment embeddings (L × N × d_z) by saliency flag and average each group.

    An empty group aggregates to the zero vector and is flagged.
    """
    z = np.asarray(torch.as_tensor(embeddings).detach(), dtype=np.float64)
    flags_arr = np.asarray(flags, dtype=bool)
    if z.ndim != 3 or z.shape[0] != flags_arr.shape[0]:
        raise DimensionMismatchError(
            f"{flags_arr.shape[0]} flags for embeddings of shape {z.shape}", "L"
        )
    if z.shape[0] == 0:
        raise InvariantViolationError("need at least one segment to aggregate")

    def _mean(selected: np.ndarray) -> tuple[np.ndarray, bool]:
        if not selected.any():
            return np.zeros(z.shape[1:]), True
        return z[selected].mean(axis=0), False

    high, high_empty = _mean(flags_arr)
    low, low_empty = _mean(~flags_arr)
    if high_empty or low_empty:
        logger.debug(f"saliency groups degenerate: high_empty={high_empty}, low_empty={low_empty}")
    return SaliencyAggregate(high, low, high_empty, low_empty)


def group_means(
    z: torch.Tensor, salient: torch.Tensor, segment_mask: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """Differentiable batched saliency aggregation.

    Args:
        z: (B, L, N, d_z) embeddings
        salient: (B, L) bool saliency flags
        segment_mask: (B, L) bool real-segment mask

    Returns:
        h_high, h_low of shape (B, N, d_z) and (B,) bool presence flags for each group
    """
    high_sel = (salient & segment_mask).to(z.dtype)
    low_sel = (~salient & segment_mask).to(z.dtype)

    def _mean(selected: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        counts = selected.sum(dim=1)
        summed = (z * selected.view(*selected.shape, 1, 1)).sum(dim=1)
        return summed / counts.clamp(min=1).view(-1, 1, 1), counts > 0

    h_high, has_high = _mean(high_sel)
    h_low, has_low = _mean(low_sel)
    return h_high, h_low, has_high, has_low
