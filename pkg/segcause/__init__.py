"""Attention-guided segmentation and causally masked decoding for time series."""

__version__ = "0.1.0"
__author__ = "segcause developers"
__description__ = (
    "Segment-level explanations for multivariate time-series models: "
    "attention-derived segments, spectral fusion and a causally masked decoder"
)

from segcause.main import main

__all__ = ["main"]
