"""Faithfulness, stability, Lipschitz and runtime evaluation."""

from segcause.evaluation.faithfulness import (
    MaskingProtocol,
    compare_high_low,
    mask_and_score,
    mask_robustness,
    masking_curve,
)
from segcause.evaluation.metrics import auprc, auroc, mse, stability
from segcause.evaluation.probes import lipschitz_probe, runtime_scaling
from segcause.evaluation.report import build_report, export_embeddings

__all__ = [
    "auroc",
    "auprc",
    "mse",
    "stability",
    "MaskingProtocol",
    "mask_and_score",
    "masking_curve",
    "compare_high_low",
    "mask_robustness",
    "lipschitz_probe",
    "runtime_scaling",
    "build_report",
    "export_embeddings",
]
