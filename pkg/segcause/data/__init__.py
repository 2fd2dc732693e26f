"""Domain types, documents, dataset I/O and the synthetic SCM generator."""

from segcause.data.io import (
    load_dataset,
    load_mask,
    load_report,
    read_table,
    save_dataset,
    save_mask,
    save_report,
    write_table,
)
from segcause.data.scm import MotifSpec, ScmSpec, generate_scm, perturb_mask, random_mask
from segcause.data.types import (
    AttentionMap,
    CausalMask,
    DegradationEntry,
    EmbeddingOrigin,
    ExplanationReport,
    LatentEmbedding,
    LipschitzSample,
    MaskSource,
    SegmentSet,
    TimeSeries,
)

__all__ = [
    # Types
    "TimeSeries",
    "AttentionMap",
    "SegmentSet",
    "CausalMask",
    "MaskSource",
    "LatentEmbedding",
    "EmbeddingOrigin",
    "DegradationEntry",
    "LipschitzSample",
    "ExplanationReport",
    # I/O
    "load_dataset",
    "save_dataset",
    "load_mask",
    "save_mask",
    "load_report",
    "save_report",
    "read_table",
    "write_table",
    # Synthetic data
    "ScmSpec",
    "MotifSpec",
    "generate_scm",
    "perturb_mask",
    "random_mask",
]
