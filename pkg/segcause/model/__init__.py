"""Model components: reference attention, segmenter, spectral fusion, encoder, decoder."""

from segcause.model.decoder import CausalDecoder, DecoderBranch, DecoderConfig
from segcause.model.encoder import SegmentEncoder, TcnConfig
from segcause.model.network import (
    Checkpoint,
    ModelConfig,
    SegCauseModel,
    SegmentationPlan,
    init_model,
    load_checkpoint,
    save_checkpoint,
)
from segcause.model.reference import (
    ReferenceConfig,
    ReferenceModelParams,
    ReferenceTrainingConfig,
    compute_attention,
    init_reference,
    train_reference,
)
from segcause.model.segmenter import SegmenterConfig, segment_series
from segcause.model.spectral import SpectralConfig, SpectralFusion

__all__ = [
    "ReferenceConfig",
    "ReferenceTrainingConfig",
    "ReferenceModelParams",
    "init_reference",
    "train_reference",
    "compute_attention",
    "SegmenterConfig",
    "segment_series",
    "SpectralConfig",
    "SpectralFusion",
    "TcnConfig",
    "SegmentEncoder",
    "DecoderConfig",
    "DecoderBranch",
    "CausalDecoder",
    "ModelConfig",
    "SegCauseModel",
    "SegmentationPlan",
    "Checkpoint",
    "init_model",
    "save_checkpoint",
    "load_checkpoint",
]
