"""Conversions between TimeSeries lists and float64 torch tensors."""

from typing import Literal

import torch

from segcause.data.types import TimeSeries
from segcause.utils.exceptions import DataError, DimensionMismatchError

TaskKind = Literal["classification", "regression"]


def stack_values(series: list[TimeSeries]) -> torch.Tensor:
    """Stack sequence values into a (B, N, T) float64 tensor.

    Raises:
        DimensionMismatchError: If sequences differ in N or T
    """
    if not series:
        raise DataError("no sequences to stack")
    shape = series[0].values.shape
    for s in series:
        if s.values.shape != shape:
            raise DimensionMismatchError(
                f"sequence '{s.id}' has shape {s.values.shape}, expected {shape}", "N×T"
            )
    return torch.stack([torch.from_numpy(s.values.copy()) for s in series]).to(torch.float64)


def stack_labels(series: list[TimeSeries]) -> torch.Tensor:
    """Class labels as a (B,) int64 tensor.

    Raises:
        DataError: If a sequence has no label
    """
    missing = [s.id for s in series if s.label is None]
    if missing:
        raise DataError(f"classification needs labels; missing for: {', '.join(missing[:5])}")
    return torch.tensor([s.label for s in series], dtype=torch.int64)


def stack_targets(series: list[TimeSeries]) -> torch.Tensor:
    """Regression targets as a (B, D) float64 tensor."""
    missing = [s.id for s in series if s.targets is None]
    if missing:
        raise DataError(f"regression needs targets; missing for: {', '.join(missing[:5])}")
    lengths = {s.targets.shape[0] for s in series}
    if len(lengths) != 1:
        raise DimensionMismatchError(f"targets have inconsistent lengths {sorted(lengths)}", "D")
    return torch.stack([torch.from_numpy(s.targets.copy()) for s in series]).to(torch.float64)


def infer_task(series: list[TimeSeries]) -> tuple[TaskKind, int]:
    """Infer task kind and output count D from the labels/targets present.

    Returns:
        ("classification", number of classes) or ("regression", target length)
    """
    if all(s.label is not None for s in series):
        return "classification", max(2, max(s.label for s in series) + 1)
    if all(s.targets is not None for s in series):
        return "regression", int(series[0].targets.shape[0])
    raise DataError("every sequence needs either a label or targets")


def task_tensor(series: list[TimeSeries], task: TaskKind) -> torch.Tensor:
    """Labels for classification, targets for regression."""
    return stack_labels(series) if task == "classification" else stack_targets(series)
