"""Training objectives: task loss, latent separation, prototype clustering, schedule."""

from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
import torch
import torch.nn.functional as F  # noqa: N812
from pydantic import BaseModel, ConfigDict, Field, field_validator

from segcause.config.validators import (
    validate_non_negative_real,
    validate_open_unit_interval,
    validate_positive_real,
    validate_schedule_knots,
)
from segcause.utils.constants import (
    DEFAULT_MARGIN,
    DEFAULT_PROTOTYPE_DECAY,
    DEFAULT_SCHEDULE_KNOTS,
    DEFAULT_WEIGHT_DECAY,
    DIVERGENCE_LIMIT,
    LOG_EPS,
)
from segcause.utils.exceptions import (
    ConfigurationError,
    DimensionMismatchError,
    NumericDivergenceError,
)

TaskLossKind = Literal["cls", "mse"]
# separation: [δ − ‖Δ‖²]_+ pushes the groups apart
# eq12_literal: [‖Δ‖² − δ]_+ caps their distance at δ
# eq10_triplet: [δ − ‖h_high − c_low‖ + ‖h_low − c_low‖]_+ around the background prototype
SeparationMode = Literal["separation", "eq12_literal", "eq10_triplet"]

Knot = tuple[float, float, float, float]


class LossWeights(BaseModel):
    """Loss weighting, schedule and regularization."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(1.0, description="Task loss weight when no schedule is set")
    beta: float = Field(0.5, description="Separation loss weight when no schedule is set")
    gamma: float = Field(0.05, description="Clustering loss weight when no schedule is set")
    schedule: Optional[list[Knot]] = Field(
        default_factory=lambda: [tuple(k) for k in DEFAULT_SCHEDULE_KNOTS],
        description="(epoch, alpha, beta, gamma) knots, linearly interpolated",
    )
    schedule_relative: bool = Field(
        True, description="Knot epochs are fractions of the epoch budget"
    )
    weight_decay: float = Field(DEFAULT_WEIGHT_DECAY, description="λ applied by the optimizer")
    margin: float = Field(DEFAULT_MARGIN, description="Separation margin δ")
    separation_mode: SeparationMode = Field("separation")
    prototype_decay: float = Field(DEFAULT_PROTOTYPE_DECAY, description="EMA decay of prototypes")
    beta_gamma_off: bool = Field(False, description="Ablation: force β = γ = 0")

    @field_validator("alpha", "beta", "gamma", "weight_decay")
    @classmethod
    def _non_negative(cls, v: float, info) -> float:
        return validate_non_negative_real(v, info.field_name)

    @field_validator("margin")
    @classmethod
    def _margin(cls, v: float) -> float:
        return validate_positive_real(v, "margin")

    @field_validator("prototype_decay")
    @classmethod
    def _decay(cls, v: float) -> float:
        return validate_open_unit_interval(v, "prototype_decay")

    @field_validator("schedule")
    @classmethod
    def _schedule(cls, v: Optional[list]) -> Optional[list[Knot]]:
        return None if v is None else validate_schedule_knots([tuple(k) for k in v])


def task_loss(
    predictions: torch.Tensor, targets: torch.Tensor, kind: TaskLossKind
) -> torch.Tensor:
    """Task loss averaged over the batch.

    ``cls`` softmax-normalizes the D outputs and returns −(1/D)Σ_j y_j log ŷ_j
    with y one-hot (integer class targets are expanded); ``mse`` returns
    (1/D)Σ_j (ŷ_j − y_j)².
    """
    predictions = torch.atleast_2d(predictions)
    n_outputs = predictions.shape[-1]
    if kind == "cls":
        if targets.dtype in (torch.int32, torch.int64):
            targets = F.one_hot(torch.atleast_1d(targets), n_outputs).to(predictions.dtype)
        targets = torch.atleast_2d(targets)
        if targets.shape != predictions.shape:
            raise DimensionMismatchError(
                f"targets {tuple(targets.shape)} vs predictions {tuple(predictions.shape)}", "D"
            )
        probabilities = torch.softmax(predictions, dim=-1).clamp(min=LOG_EPS)
        return -(targets * probabilities.log()).sum(dim=-1).div(n_outputs).mean()
    if kind == "mse":
        targets = torch.atleast_2d(targets).to(predictions.dtype)
        if targets.shape != predictions.shape:
            raise DimensionMismatchError(
                f"targets {tuple(targets.shape)} vs predictions {tuple(predictions.shape)}", "D"
            )
        return (predictions - targets).pow(2).mean()
    raise ConfigurationError(f"unknown task loss kind: {kind}")


def separation_loss(
    h_high: torch.Tensor,
    h_low: torch.Tensor,
    delta: float,
    mode: SeparationMode = "separation",
    c_low: Optional[torch.Tensor] = None,
    valid: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Margin loss between salient and background aggregates.

    Args:
        h_high: (N, d_z) or (B, N, d_z) salient aggregates
        h_low: Background aggregates, same shape
        delta: Margin δ
        mode: separation, eq12_literal or eq10_triplet (see :data:`SeparationMode`)
        c_low: (N, d_z) background prototypes, required for eq10_triplet
        valid: (B,) bool, samples where both groups exist; others are ignored

    Returns:
        Mean over variables (and valid samples); zero if no sample is valid
    """
    if h_high.shape != h_low.shape:
        raise DimensionMismatchError(
            f"h_high {tuple(h_high.shape)} vs h_low {tuple(h_low.shape)}", "h"
        )
    if mode == "eq10_triplet":
        if c_low is None:
            raise ConfigurationError("eq10_triplet separation needs background prototypes")
        to_high = torch.linalg.vector_norm(h_high - c_low, dim=-1)
        to_low = torch.linalg.vector_norm(h_low - c_low, dim=-1)
        per_variable = torch.relu(delta - to_high + to_low)
    else:
        distance = (h_high - h_low).pow(2).sum(dim=-1)
        if mode == "separation":
            per_variable = torch.relu(delta - distance)
        elif mode == "eq12_literal":
            per_variable = torch.relu(distance - delta)
        else:
            raise ConfigurationError(f"unknown separation mode: {mode}")

    per_sample = per_variable.mean(dim=-1)
    if valid is None:
        return per_sample.mean()
    weights = valid.to(per_sample.dtype)
    return (per_sample * weights).sum() / weights.sum().clamp(min=1.0)


def separation_statistic(
    h_high: torch.Tensor, h_low: torch.Tensor, valid: Optional[torch.Tensor] = None
) -> float:
    """Mean ‖h_high − h_low‖ over variables and valid samples."""
    with torch.no_grad():
        norms = torch.linalg.vector_norm(h_high - h_low, dim=-1).mean(dim=-1)
        if valid is not None:
            if not valid.any():
                return 0.0
            norms = norms[valid]
        return float(norms.mean())


@dataclass
class Prototypes:
    """Per-group prototypes c^{(k)} (N × d_z) and variable weights w^{(k)} (N × N)."""

    high: torch.Tensor
    low: torch.Tensor
    w_high: torch.Tensor
    w_low: torch.Tensor

    def __post_init__(self):
        for name, w in (("w_high", self.w_high), ("w_low", self.w_low)):
            if not torch.equal(w, w.T):
                raise ConfigurationError(f"{name} must be symmetric")
            if w.min() < 0 or w.max() > 1:
                raise ConfigurationError(f"{name} entries must lie in [0, 1]")
        if self.high.shape != self.low.shape:
            raise DimensionMismatchError("prototype groups differ in shape", "prototypes")


def _pairwise_term(c: torch.Tensor, w: torch.Tensor) -> torch.Tensor:
    squared = (c.unsqueeze(0) - c.unsqueeze(1)).pow(2).sum(dim=-1)
    return (w * squared).sum()


def clustering_loss(prototypes: Prototypes) -> torch.Tensor:
    """(1/2N) Σ_k Σ_{i,j} w_ij^{(k)} ‖c_i^{(k)} − c_j^{(k)}‖² over ordered pairs."""
    n_variables = prototypes.high.shape[0]
    total = _pairwise_term(prototypes.high, prototypes.w_high) + _pairwise_term(
        prototypes.low, prototypes.w_low
    )
    return total / (2 * n_variables)


@dataclass(frozen=True)
class LossParts:
    """Unweighted loss terms of one step."""

    task: torch.Tensor
    dist: torch.Tensor
    clus: torch.Tensor


def total_loss(parts: LossParts, weights: tuple[float, float, float]) -> torch.Tensor:
    """α·task + β·dist + γ·clus (weight decay lives in the optimizer).

    Raises:
        ConfigurationError: If a weight is negative
        NumericDivergenceError: If a part or the total is non-finite or above 1e6
    """
    alpha, beta, gamma = weights
    if min(alpha, beta, gamma) < 0:
        raise ConfigurationError(f"loss weights must be non-negative, got {weights}")
    for name in ("task", "dist", "clus"):
        value = getattr(parts, name)
        if not torch.isfinite(value).all():
            raise NumericDivergenceError(f"{name} loss is not finite: {value.item()}")
    total = alpha * parts.task + beta * parts.dist + gamma * parts.clus
    if total.item() > DIVERGENCE_LIMIT:
        raise NumericDivergenceError(f"total loss {total.item():.4g} exceeds {DIVERGENCE_LIMIT:g}")
    return total


def staged_schedule(
    epoch: int, cfg: LossWeights, total_epochs: Optional[int] = None
) -> tuple[float, float, float]:
    """(α, β, γ) at ``epoch``, linear between knots and clamped outside them.

    Relative knots are placed at fraction·(total_epochs − 1), so the last
    knot lands on the final epoch.
    """
    if epoch < 0:
        raise ConfigurationError(f"epoch must be non-negative, got {epoch}")
    if cfg.schedule is None:
        weights = (cfg.alpha, cfg.beta, cfg.gamma)
    else:
        knots = np.asarray(cfg.schedule, dtype=np.float64)
        positions = knots[:, 0]
        if cfg.schedule_relative:
            if total_epochs is None:
                raise ConfigurationError("relative schedule knots need the epoch budget")
            positions = positions * max(total_epochs - 1, 1)
        weights = tuple(float(np.interp(epoch, positions, knots[:, c])) for c in (1, 2, 3))
    if cfg.beta_gamma_off:
        return weights[0], 0.0, 0.0
    return weights


def attention_kernel(profiles: np.ndarray) -> np.ndarray:
    """Gaussian similarity between variable attention profiles.

    Bandwidth is the median off-diagonal Euclidean distance; a zero bandwidth
    (identical profiles) yields all ones.

    Args:
        profiles: (N, P) one profile per variable

    Returns:
        Symmetric (N, N) weights in [0, 1] with unit diagonal
    """
    profiles = np.asarray(profiles, dtype=np.float64)
    n_variables = profiles.shape[0]
    distances = np.linalg.norm(profiles[:, None, :] - profiles[None, :, :], axis=-1)
    off_diagonal = distances[~np.eye(n_variables, dtype=bool)]
    bandwidth = float(np.median(off_diagonal)) if off_diagonal.size else 0.0
    if bandwidth <= 0:
        return np.ones((n_variables, n_variables))
    kernel = np.exp(-(distances**2) / (2.0 * bandwidth**2))
    return (kernel + kernel.T) / 2.0


def group_profiles(
    attention: np.ndarray, boundaries: list[tuple[int, ...]], saliency: list[tuple[bool, ...]]
) -> tuple[np.ndarray, np.ndarray]:
    """Per-variable attention profiles over salient and background time steps.

    Each profile is the dataset-mean attention row with the other group's
    time steps zeroed.

    Returns:
        (high, low) profiles, each N × T
    """
    attention = np.asarray(attention, dtype=np.float64)
    high = np.zeros(attention.shape[1:])
    low = np.zeros(attention.shape[1:])
    for b, (bounds, flags) in enumerate(zip(boundaries, saliency)):
        for (start, end), flag in zip(zip(bounds, bounds[1:]), flags):
            target = high if flag else low
            target[:, start:end] += attention[b, :, start:end]
    count = max(len(boundaries), 1)
    return high / count, low / count


class PrototypeTracker:
    """EMA prototypes blended with the current batch aggregates.

    c = decay·EMA + (1 − decay)·batch mean; the EMA part is detached so
    gradients reach the encoder only through the current batch.
    """

    def __init__(self, w_high: np.ndarray, w_low: np.ndarray, decay: float):
        self.w_high = torch.as_tensor(w_high, dtype=torch.float64)
        self.w_low = torch.as_tensor(w_low, dtype=torch.float64)
        self.decay = decay
        self.ema_high: Optional[torch.Tensor] = None
        self.ema_low: Optional[torch.Tensor] = None

    def _blend(
        self, ema: Optional[torch.Tensor], h: torch.Tensor, present: torch.Tensor
    ) -> torch.Tensor:
        if present.any():
            batch_mean = h[present].mean(dim=0)
            if ema is None:
                return batch_mean
            return self.decay * ema + (1.0 - self.decay) * batch_mean
        if ema is None:
            return torch.zeros(h.shape[1:], dtype=h.dtype)
        return ema

    def current(
        self,
        h_high: torch.Tensor,
        h_low: torch.Tensor,
        has_high: torch.Tensor,
        has_low: torch.Tensor,
    ) -> Prototypes:
        """Prototypes for this step (differentiable through the batch means)."""
        return Prototypes(
            high=self._blend(self.ema_high, h_high, has_high),
            low=self._blend(self.ema_low, h_low, has_low),
            w_high=self.w_high,
            w_low=self.w_low,
        )

    def commit(
        self, prototypes: Prototypes, has_high: torch.Tensor, has_low: torch.Tensor
    ) -> None:
        """Store the step's prototypes as the new EMA state for groups seen in the batch."""
        if has_high.any():
            self.ema_high = prototypes.high.detach().clone()
        if has_low.any():
            self.ema_low = prototypes.low.detach().clone()

    def state_dict(self) -> dict[str, Union[torch.Tensor, float, None]]:
        return {
            "w_high": self.w_high,
            "w_low": self.w_low,
            "decay": self.decay,
            "ema_high": self.ema_high,
            "ema_low": self.ema_low,
        }

    @classmethod
    def from_state(cls, state: dict) -> "PrototypeTracker":
        tracker = cls(state["w_high"], state["w_low"], float(state["decay"]))
        tracker.ema_high = state.get("ema_high")
        tracker.ema_low = state.get("ema_low")
        return tracker
