"""Staged optimization loop.

The reference model stays frozen and the segmentation plan is computed once
for the whole training set. Each epoch shuffles with a generator seeded by
``seed + epoch``, so a resumed run replays exactly the batches an
uninterrupted run would have seen.
"""

from dataclasses import asdict, dataclass, field
from typing import Literal, Optional

import torch
from pydantic import BaseModel, ConfigDict, Field, field_validator

from segcause.config.validators import (
    validate_non_negative_integer,
    validate_non_negative_real,
    validate_positive_integer,
)
from segcause.data.types import TimeSeries
from segcause.model.batching import infer_task, stack_values, task_tensor
from segcause.model.decoder import group_means
from segcause.model.network import Checkpoint, SegCauseModel, SegmentationPlan, save_checkpoint
from segcause.training.objectives import (
    LossParts,
    LossWeights,
    PrototypeTracker,
    attention_kernel,
    clustering_loss,
    group_profiles,
    separation_loss,
    separation_statistic,
    staged_schedule,
    task_loss,
    total_loss,
)
from segcause.utils.constants import DEFAULT_LEARNING_RATE, DEFAULT_MOMENTUM
from segcause.utils.exceptions import ConfigurationError, NumericDivergenceError
from segcause.utils.logging_config import get_logger
from segcause.utils.path_utils import PathLike
from segcause.utils.reproducibility import seed_everything, torch_generator

logger = get_logger(__name__)


class TrainingConfig(BaseModel):
    """Optimization recipe."""

    model_config = ConfigDict(frozen=True)

    epochs: int = Field(50)
    batch_size: int = Field(32)
    learning_rate: float = Field(DEFAULT_LEARNING_RATE)
    momentum: float = Field(DEFAULT_MOMENTUM)
    optimizer: Literal["sgd", "adam"] = Field("sgd")
    seed: int = Field(0)
    checkpoint_every: int = Field(0, description="Write a checkpoint every n epochs (0 = never)")
    losses: LossWeights = Field(default_factory=LossWeights)

    @field_validator("epochs", "checkpoint_every")
    @classmethod
    def _non_negative_int(cls, v: int, info) -> int:
        return validate_non_negative_integer(v, info.field_name)

    @field_validator("batch_size")
    @classmethod
    def _batch(cls, v: int) -> int:
        return validate_positive_integer(v, "batch_size")

    @field_validator("learning_rate", "momentum")
    @classmethod
    def _non_negative(cls, v: float, info) -> float:
        return validate_non_negative_real(v, info.field_name)


@dataclass(frozen=True)
class EpochRecord:
    """One row of the loss trace."""

    epoch: int
    alpha: float
    beta: float
    gamma: float
    task: float
    dist: float
    clus: float
    total: float
    separation: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass
class TrainingResult:
    """Trained model plus the state needed to resume."""

    model: SegCauseModel
    trace: list[EpochRecord]
    tracker: PrototypeTracker
    optimizer_state: dict
    epochs_completed: int
    config: TrainingConfig
    extra: dict = field(default_factory=dict)

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            model=self.model,
            optimizer_state=self.optimizer_state,
            prototypes_state=self.tracker.state_dict(),
            epoch=self.epochs_completed,
            trace=[r.as_dict() for r in self.trace],
            training_config=self.config.model_dump(),
        )


def build_optimizer(model: SegCauseModel, cfg: TrainingConfig) -> torch.optim.Optimizer:
    """SGD with momentum (default) or Adam, weight decay λ from the loss config."""
    if cfg.optimizer == "adam":
        return torch.optim.Adam(
            model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.losses.weight_decay
        )
    return torch.optim.SGD(
        model.parameters(),
        lr=cfg.learning_rate,
        momentum=cfg.momentum,
        weight_decay=cfg.losses.weight_decay,
    )


def _fresh_tracker(plan: SegmentationPlan, losses: LossWeights) -> PrototypeTracker:
    high, low = group_profiles(plan.attention, plan.boundaries, plan.saliency)
    return PrototypeTracker(attention_kernel(high), attention_kernel(low), losses.prototype_decay)


def train(
    model: SegCauseModel,
    data: list[TimeSeries],
    cfg: TrainingConfig,
    resume: Optional[Checkpoint] = None,
    checkpoint_path: Optional[PathLike] = None,
) -> TrainingResult:
    """Train encoder, fusion and decoder under the staged objective.

    Args:
        model: Model to train in place (its reference stays frozen)
        data: Labeled or targeted sequences
        cfg: Optimization recipe
        resume: Checkpoint whose optimizer, prototype and epoch state continue
        checkpoint_path: Destination for periodic checkpoints

    Returns:
        Training result with the per-epoch loss trace

    Raises:
        ConfigurationError: If the data do not fit the model head
        NumericDivergenceError: If a loss becomes non-finite or exceeds 1e6
    """
    task, n_outputs = infer_task(data)
    if task != model.config.task:
        raise ConfigurationError(f"model head is {model.config.task}, data is {task}")
    if (task == "classification" and n_outputs > model.n_outputs) or (
        task == "regression" and n_outputs != model.n_outputs
    ):
        raise ConfigurationError(
            f"dimension mismatch: data need D={n_outputs}, model has D={model.n_outputs}"
        )
    kind = "cls" if task == "classification" else "mse"
    losses = cfg.losses

    inputs = stack_values(data)
    targets = task_tensor(data, task)
    plan = model.plan_series(data)

    start_epoch = 0
    trace: list[EpochRecord] = []
    optimizer = build_optimizer(model, cfg)
    if resume is not None:
        start_epoch = resume.epoch
        trace = [EpochRecord(**row) for row in resume.trace]
        if resume.optimizer_state is not None:
            optimizer.load_state_dict(resume.optimizer_state)
        if resume.prototypes_state is None:
            logger.warning("Checkpoint has no prototype state; prototypes restart from scratch")
            tracker = _fresh_tracker(plan, losses)
        else:
            tracker = PrototypeTracker.from_state(resume.prototypes_state)
        logger.info(f"Resuming training at epoch {start_epoch}")
    else:
        seed_everything(cfg.seed)
        tracker = _fresh_tracker(plan, losses)

    logger.info(
        f"Training: {len(data)} sequences, epochs {start_epoch}->{cfg.epochs}, "
        f"optimizer={cfg.optimizer}, lr={cfg.learning_rate}, mode={losses.separation_mode}"
    )
    model.train()
    for epoch in range(start_epoch, cfg.epochs):
        weights = staged_schedule(epoch, losses, cfg.epochs)
        order = torch.randperm(len(data), generator=torch_generator(cfg.seed + epoch))
        sums = dict.fromkeys(("task", "dist", "clus", "total", "separation"), 0.0)
        for start in range(0, len(data), cfg.batch_size):
            index = order[start : start + cfg.batch_size]
            output = model.run(inputs[index], plan.subset(index))
            h_high, h_low, has_high, has_low = group_means(
                output.embeddings, output.salient, output.segment_mask
            )
            both = has_high & has_low
            prototypes = tracker.current(h_high, h_low, has_high, has_low)
            parts = LossParts(
                task=task_loss(output.predictions, targets[index], kind),
                dist=separation_loss(
                    h_high, h_low, losses.margin, losses.separation_mode, prototypes.low, both
                ),
                clus=clustering_loss(prototypes),
            )
            try:
                loss = total_loss(parts, weights)
            except NumericDivergenceError as e:
                raise NumericDivergenceError(f"epoch {epoch}: {e}", epoch) from e

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            tracker.commit(prototypes, has_high, has_low)

            share = len(index)
            sums["task"] += parts.task.item() * share
            sums["dist"] += parts.dist.item() * share
            sums["clus"] += parts.clus.item() * share
            sums["total"] += loss.item() * share
            sums["separation"] += separation_statistic(h_high, h_low, both) * share

        means = {k: v / len(data) for k, v in sums.items()}
        record = EpochRecord(epoch, *weights, **means)
        trace.append(record)
        logger.info(
            f"epoch {epoch}: α={weights[0]:.3f} β={weights[1]:.3f} γ={weights[2]:.3f} "
            f"task={record.task:.4f} dist={record.dist:.4f} clus={record.clus:.4f} "
            f"total={record.total:.4f}",
            extra={"metrics": record.as_dict()},
        )
        if checkpoint_path and cfg.checkpoint_every and (epoch + 1) % cfg.checkpoint_every == 0:
            partial = TrainingResult(
                model, trace, tracker, optimizer.state_dict(), epoch + 1, cfg
            )
            save_checkpoint(checkpoint_path, partial.checkpoint())

    model.eval()
    return TrainingResult(model, trace, tracker, optimizer.state_dict(), cfg.epochs, cfg)
