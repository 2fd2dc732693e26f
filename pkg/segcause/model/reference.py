"""Reference attention model.

Instance normalization, then an LSTM run along time for every variable with
weights shared across variables. The LSTM outputs and the raw (normalized)
inputs are projected into a shared space, concatenated, passed through tanh
and a linear scorer, and softmax-normalized over time. The resulting
attention map drives segmentation; the model is trained on the task labels
and then frozen.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F  # noqa: N812
from pydantic import BaseModel, ConfigDict, Field, field_validator
from torch import nn

from segcause.config.validators import (
    validate_non_negative_integer,
    validate_positive_integer,
    validate_positive_real,
)
from segcause.data.types import AttentionMap, TimeSeries
from segcause.model.batching import TaskKind, infer_task, stack_values, task_tensor
from segcause.utils.constants import (
    DIVERGENCE_LIMIT,
    INSTANCE_NORM_EPS,
    REFERENCE_CHECKPOINT_VERSION,
)
from segcause.utils.exceptions import (
    ArtifactIOError,
    ConfigurationError,
    DimensionMismatchError,
    NumericDivergenceError,
)
from segcause.utils.logging_config import get_logger
from segcause.utils.path_utils import PathLike
from segcause.utils.reproducibility import torch_generator

logger = get_logger(__name__)


class ReferenceConfig(BaseModel):
    """Architecture of the reference model."""

    model_config = ConfigDict(frozen=True)

    n_variables: int = Field(..., description="Input variables N")
    n_outputs: int = Field(..., description="Classes (classification) or targets (regression)")
    task: TaskKind = Field("classification")
    lstm_hidden: int = Field(16, description="LSTM hidden width")
    projection_dim: int = Field(16, description="Width of the shared projection space")

    @field_validator("n_variables", "n_outputs", "lstm_hidden", "projection_dim")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        return validate_positive_integer(v, info.field_name)


class ReferenceTrainingConfig(BaseModel):
    """Optimization recipe for the reference model."""

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(30)
    learning_rate: float = Field(1e-2)
    batch_size: int = Field(32)
    seed: int = Field(0)
    lstm_hidden: int = Field(16)
    projection_dim: int = Field(16)

    @field_validator("epochs")
    @classmethod
    def _epochs(cls, v: int) -> int:
        return validate_non_negative_integer(v, "epochs")

    @field_validator("batch_size", "lstm_hidden", "projection_dim")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        return validate_positive_integer(v, info.field_name)

    @field_validator("learning_rate")
    @classmethod
    def _lr(cls, v: float) -> float:
        return validate_positive_real(v, "learning_rate")


def instance_normalize_tensor(x: torch.Tensor, eps: float = INSTANCE_NORM_EPS) -> torch.Tensor:
    """Normalize every row of ``x`` (…, T) to zero mean and unit variance.

    The standard deviation is floored at ``eps`` so constant rows map to zero
    (and keep a finite gradient).
    """
    centered = x - x.mean(dim=-1, keepdim=True)
    variance = centered.pow(2).mean(dim=-1, keepdim=True)
    return centered / variance.clamp(min=eps * eps).sqrt()


def instance_normalize(x: TimeSeries) -> np.ndarray:
    """Per-variable instance normalization of a series (N×T float64)."""
    values = torch.from_numpy(x.values.copy())
    return instance_normalize_tensor(values).numpy()


class ReferenceAttentionModel(nn.Module):
    """LSTM + tanh attention reference model (float64)."""

    def __init__(self, config: ReferenceConfig):
        super().__init__()
        self.config = config
        hidden = config.lstm_hidden
        self.lstm = nn.LSTM(input_size=1, hidden_size=hidden, batch_first=True)
        self.project_hidden = nn.Linear(hidden, config.projection_dim)
        self.project_input = nn.Linear(1, config.projection_dim)
        self.score = nn.Linear(2 * config.projection_dim, 1)
        self.head = nn.Linear(config.n_variables * hidden, config.n_outputs)
        self.double()

    def _run(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        batch, n_variables, length = x.shape
        if n_variables != self.config.n_variables:
            raise DimensionMismatchError(
                f"reference model expects N={self.config.n_variables}, got N={n_variables}",
                "n_variables",
            )
        steps = instance_normalize_tensor(x).reshape(batch * n_variables, length, 1)
        hidden, _ = self.lstm(steps)
        shared = torch.cat([self.project_hidden(hidden), self.project_input(steps)], dim=-1)
        scores = self.score(torch.tanh(shared)).squeeze(-1)
        attention = torch.softmax(scores, dim=-1)
        context = (attention.unsqueeze(-1) * hidden).sum(dim=1)
        return (
            attention.reshape(batch, n_variables, length),
            context.reshape(batch, n_variables * self.config.lstm_hidden),
        )

    def attention(self, x: torch.Tensor) -> torch.Tensor:
        """Attention map (B, N, T) for raw inputs (B, N, T)."""
        return self._run(x)[0]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Task logits (classification) or predictions (regression), shape (B, n_outputs)."""
        return self.head(self._run(x)[1])


@dataclass
class ReferenceModelParams:
    """Frozen reference model weights plus their architecture."""

    config: ReferenceConfig
    weights: dict[str, torch.Tensor]
    trained: bool = False
    loss_history: list[float] = field(default_factory=list)
    _module: Optional[ReferenceAttentionModel] = field(
        default=None, init=False, repr=False, compare=False
    )

    @classmethod
    def from_module(
        cls, module: ReferenceAttentionModel, trained: bool, loss_history: Optional[list] = None
    ) -> "ReferenceModelParams":
        weights = {k: v.detach().clone() for k, v in module.state_dict().items()}
        return cls(module.config, weights, trained, list(loss_history or []))

    def build(self) -> ReferenceAttentionModel:
        """Frozen module carrying these weights (built once, then cached)."""
        if self._module is None:
            module = ReferenceAttentionModel(self.config)
            module.load_state_dict(self.weights)
            module.eval()
            module.requires_grad_(False)
            self._module = module
        return self._module

    def to_state(self) -> dict:
        return {
            "version": REFERENCE_CHECKPOINT_VERSION,
            "config": self.config.model_dump(),
            "weights": self.weights,
            "trained": self.trained,
            "loss_history": self.loss_history,
        }

    @classmethod
    def from_state(cls, state: dict) -> "ReferenceModelParams":
        if state.get("version") != REFERENCE_CHECKPOINT_VERSION:
            raise ArtifactIOError(
                f"Unsupported reference checkpoint version: {state.get('version')}"
            )
        return cls(
            ReferenceConfig(**state["config"]),
            state["weights"],
            bool(state["trained"]),
            list(state.get("loss_history", [])),
        )

    def save(self, path: PathLike) -> None:
        try:
            torch.save(self.to_state(), Path(path))
        except OSError as e:
            raise ArtifactIOError(f"Cannot write reference checkpoint {path}: {e}") from e

    @classmethod
    def load(cls, path: PathLike) -> "ReferenceModelParams":
        if not Path(path).is_file():
            raise ArtifactIOError(f"Reference checkpoint not found: {path}")
        return cls.from_state(torch.load(Path(path), weights_only=False))


def compute_attention(x: TimeSeries, params: ReferenceModelParams) -> AttentionMap:
    """Attention map of one series under the frozen reference model.

    Raises:
        DimensionMismatchError: If the series has a different N than the model
    """
    if not params.trained:
        logger.debug("Computing attention with an untrained reference model")
    if x.n_variables != params.config.n_variables:
        raise DimensionMismatchError(
            f"series '{x.id}' has N={x.n_variables}, reference model expects "
            f"N={params.config.n_variables}",
            "n_variables",
        )
    with torch.no_grad():
        scores = params.build().attention(stack_values([x]))[0]
    return AttentionMap(scores.numpy())


def init_reference(config: ReferenceConfig, seed: int) -> ReferenceModelParams:
    """Seeded, untrained reference parameters."""
    torch.manual_seed(seed)
    return ReferenceModelParams.from_module(ReferenceAttentionModel(config), trained=False)


def train_reference(
    data: list[TimeSeries],
    config: ReferenceTrainingConfig,
    architecture: Optional[ReferenceConfig] = None,
) -> ReferenceModelParams:
    """Fit the reference model on the task labels (or targets).

    Args:
        data: Labeled (classification) or targeted (regression) sequences
        config: Optimization recipe
        architecture: Explicit architecture; inferred from the data if omitted

    Returns:
        Trained parameters with the per-epoch loss history

    Raises:
        ConfigurationError: If labels/targets do not fit the head
        NumericDivergenceError: If the loss becomes non-finite
    """
    task, n_outputs = infer_task(data)
    if architecture is None:
        architecture = ReferenceConfig(
            n_variables=data[0].n_variables,
            n_outputs=n_outputs,
            task=task,
            lstm_hidden=config.lstm_hidden,
            projection_dim=config.projection_dim,
        )
    if architecture.task != task:
        raise ConfigurationError(f"reference head is {architecture.task}, data is {task}")
    if task == "classification" and n_outputs > architecture.n_outputs:
        raise ConfigurationError(
            f"labels need {n_outputs} classes but the reference head has "
            f"{architecture.n_outputs} outputs"
        )
    if task == "regression" and n_outputs != architecture.n_outputs:
        raise ConfigurationError(
            f"targets have length {n_outputs} but the reference head has "
            f"{architecture.n_outputs} outputs"
        )

    params = init_reference(architecture, config.seed)
    if config.epochs == 0:
        return params

    model = ReferenceAttentionModel(architecture)
    model.load_state_dict(params.weights)
    inputs = stack_values(data)
    targets = task_tensor(data, task)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    logger.info(
        f"Training reference model: {len(data)} sequences, {config.epochs} epochs, task={task}"
    )
    history: list[float] = []
    for epoch in range(config.epochs):
        order = torch.randperm(len(data), generator=torch_generator(config.seed + epoch))
        total, seen = 0.0, 0
        for start in range(0, len(data), config.batch_size):
            index = order[start : start + config.batch_size]
            output = model(inputs[index])
            if task == "classification":
                loss = F.cross_entropy(output, targets[index])
            else:
                loss = F.mse_loss(output, targets[index])
            if not torch.isfinite(loss) or loss.item() > DIVERGENCE_LIMIT:
                raise NumericDivergenceError(
                    f"reference loss diverged at epoch {epoch}: {loss.item()}", epoch
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item() * len(index)
            seen += len(index)
        history.append(total / seen)
        logger.debug(f"reference epoch {epoch}: loss={history[-1]:.6f}")

    logger.info(f"Reference model trained: final loss {history[-1]:.4f}")
    return ReferenceModelParams.from_module(model, trained=True, loss_history=history)
