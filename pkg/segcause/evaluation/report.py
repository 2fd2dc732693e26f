"""Result tables, the explanation report and embedding export."""

from typing import Optional

import numpy as np
import torch

from segcause.data.io import write_table
from segcause.data.types import (
    DegradationEntry,
    EmbeddingOrigin,
    ExplanationReport,
    LipschitzSample,
    TimeSeries,
)
from segcause.evaluation.faithfulness import MaskingProtocol, mask_and_score
from segcause.explainers.base import normalize_attribution
from segcause.model.batching import infer_task, stack_values
from segcause.model.decoder import aggregate_saliency
from segcause.model.network import SegCauseModel
from segcause.utils.exceptions import MetricUndefinedError
from segcause.utils.logging_config import get_logger
from segcause.utils.path_utils import PathLike

logger = get_logger(__name__)


def table_metrics(data: list[TimeSeries]) -> list[str]:
    """Metrics reported for this task: AUPRC/AUROC or MSE."""
    task, _ = infer_task(data)
    return ["auprc", "auroc"] if task == "classification" else ["mse"]


def degradation_row(
    method: str,
    model: SegCauseModel,
    data: list[TimeSeries],
    attributions: np.ndarray,
    protocol: MaskingProtocol,
) -> tuple[dict, dict[str, DegradationEntry]]:
    """One method's row: masked metrics and their relative change.

    A metric that becomes undefined after masking is reported as NaN.
    """
    row: dict = {"method": method, "target": protocol.target, "k_percent": protocol.k_percent}
    entries: dict[str, DegradationEntry] = {}
    for metric in table_metrics(data):
        try:
            entry = mask_and_score(model, data, protocol, metric, attributions)
        except MetricUndefinedError as e:
            logger.warning(f"{method}: {metric} undefined after masking ({e})")
            row[metric] = row[f"delta_{metric}_percent"] = float("nan")
            continue
        entries[metric] = entry
        row[f"{metric}_before"] = entry.before
        row[metric] = entry.after
        row[f"delta_{metric}_percent"] = entry.delta_percent
    return row, entries


def build_report(
    attributions: np.ndarray,
    degradation: dict[str, DegradationEntry],
    stability: Optional[float] = None,
    lipschitz: Optional[list[LipschitzSample]] = None,
    runtime: Optional[dict[int, float]] = None,
) -> ExplanationReport:
    """Report whose attribution is the normalized dataset-mean map."""
    mean_map = normalize_attribution(np.asarray(attributions, dtype=np.float64).mean(axis=0))
    return ExplanationReport(
        attribution=mean_map,
        degradation=degradation,
        stability=stability,
        lipschitz_samples=tuple(lipschitz or ()),
        runtime=runtime or {},
    )


def embedding_rows(model: SegCauseModel, data: list[TimeSeries]) -> list[dict]:
    """Segment embeddings plus per-sequence high/low aggregates as flat rows."""
    plan = model.plan_series(data)
    with torch.no_grad():
        output = model.run(stack_values(data), plan)
    z = output.embeddings.numpy()
    rows = []
    for b, series in enumerate(data):
        n_segments = len(plan.boundaries[b]) - 1
        flags = list(plan.saliency[b])
        base = {"series_id": series.id, "label": series.label}
        for k in range(n_segments):
            for n in range(z.shape[2]):
                rows.append(
                    {
                        **base,
                        "origin": EmbeddingOrigin.SEGMENT.value,
                        "segment": k,
                        "variable": n,
                        "salient": flags[k],
                        **_vector_columns(z[b, k, n]),
                    }
                )
        groups = aggregate_saliency(z[b, :n_segments], flags)
        for origin, vectors, empty in (
            (EmbeddingOrigin.HIGH_AGG, groups.high, groups.high_empty),
            (EmbeddingOrigin.LOW_AGG, groups.low, groups.low_empty),
        ):
            if empty:
                continue
            for n in range(vectors.shape[0]):
                rows.append(
                    {
                        **base,
                        "origin": origin.value,
                        "segment": -1,
                        "variable": n,
                        "salient": origin == EmbeddingOrigin.HIGH_AGG,
                        **_vector_columns(vectors[n]),
                    }
                )
    return rows


def export_embeddings(model: SegCauseModel, data: list[TimeSeries], path: PathLike) -> int:
    """Write latent embeddings as CSV for external projection; returns the row count."""
    rows = embedding_rows(model, data)
    write_table(rows, path)
    logger.info(f"Exported {len(rows)} embeddings to {path}")
    return len(rows)


def _vector_columns(vector: np.ndarray) -> dict[str, float]:
    return {f"z{i}": float(v) for i, v in enumerate(vector)}
