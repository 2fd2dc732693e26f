"""Objectives and the staged trainer."""

from segcause.training.objectives import LossWeights, PrototypeTracker, staged_schedule
from segcause.training.trainer import EpochRecord, TrainingConfig, TrainingResult, train

__all__ = [
    "LossWeights",
    "PrototypeTracker",
    "staged_schedule",
    "TrainingConfig",
    "TrainingResult",
    "EpochRecord",
    "train",
]
