"""Shared fixtures: small SCM datasets and tiny untrained models."""

from typing import Callable

import numpy as np
import pytest

from segcause.data.scm import MotifSpec, ScmSpec, generate_scm
from segcause.data.types import CausalMask, TimeSeries
from segcause.model.decoder import DecoderConfig
from segcause.model.encoder import TcnConfig
from segcause.model.network import ModelConfig, SegCauseModel, init_model
from segcause.model.reference import ReferenceConfig, init_reference
from segcause.model.segmenter import SegmenterConfig
from segcause.model.spectral import SpectralConfig

CHAIN_ADJACENCY = [[1, 0, 0], [1, 1, 0], [0, 1, 1]]


def small_model_config(n_variables: int, task: str = "classification") -> ModelConfig:
    """A model small enough to train for a few epochs inside a unit test."""
    return ModelConfig(
        n_variables=n_variables,
        task=task,
        segmenter=SegmenterConfig(pool_kernel=3, l_max=4),
        spectral=SpectralConfig(j_max=3, t_prime=4, trend_dim=4, fusion_dim=8),
        encoder=TcnConfig(input_proj_dim=4, channels=4, kernel_size=2, dilations=(1, 2), d_z=8),
        decoder=DecoderConfig(lstm_hidden=4, max_segments=3),
    )


def build_small_model(mask: CausalMask, task: str = "classification", seed: int = 0):
    """Seeded untrained model (and its untrained reference) for ``mask``."""
    reference = init_reference(
        ReferenceConfig(
            n_variables=mask.n_variables,
            n_outputs=mask.n_outputs,
            task=task,
            lstm_hidden=4,
            projection_dim=4,
        ),
        seed,
    )
    return init_model(small_model_config(mask.n_variables, task), mask, reference, seed)


@pytest.fixture
def make_model() -> Callable[..., SegCauseModel]:
    """Factory for small untrained models."""
    return build_small_model


@pytest.fixture
def classification_spec() -> ScmSpec:
    """Two-variable SCM with a burst on variable 0 for class 1."""
    return ScmSpec(
        n_variables=2,
        length=32,
        motif=MotifSpec(window_start=8, window_end=16, amplitude=3.0, variables=[0]),
    )


@pytest.fixture
def forecasting_spec() -> ScmSpec:
    """Three-variable chain x0 → x1 → x2 predicting the next step."""
    return ScmSpec(
        n_variables=3,
        length=32,
        task="forecasting",
        adjacency=CHAIN_ADJACENCY,
        noise_std=0.1,
        motif=None,
    )


@pytest.fixture
def classification_data(classification_spec) -> tuple[list[TimeSeries], CausalMask]:
    """Sixteen labeled sequences and their all-parents mask."""
    return generate_scm(classification_spec, count=16, seed=0)


@pytest.fixture
def forecasting_data(forecasting_spec) -> tuple[list[TimeSeries], CausalMask]:
    """Twelve targeted sequences and the chain mask."""
    return generate_scm(forecasting_spec, count=12, seed=0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
