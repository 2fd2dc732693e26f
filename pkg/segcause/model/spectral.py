"""Global frequency-domain features and their fusion into segment embeddings.

Two features per variable reach the decoder: the wavelet approximation a_J
(the low-frequency trend, with J picked from the dominant frequency) and the
leading t' DFT coefficients. Both are projected linearly to d_z and added to
every segment embedding of that variable.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pywt
import torch
import torch.nn.functional as F  # noqa: N812
from pydantic import BaseModel, ConfigDict, Field, field_validator
from torch import nn

from segcause.config.validators import validate_choice, validate_positive_integer
from segcause.utils.constants import (
    DEFAULT_D_Z,
    DEFAULT_J_MAX,
    DEFAULT_T_PRIME,
    DEFAULT_TREND_DIM,
    SUPPORTED_WAVELETS,
    WAVELET_MODE,
)
from segcause.utils.exceptions import ConfigurationError, DimensionMismatchError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)


class SpectralConfig(BaseModel):
    """Spectral feature settings."""

    model_config = ConfigDict(frozen=True)

    j_max: int = Field(DEFAULT_J_MAX, description="Maximum wavelet level J_max")
    t_prime: int = Field(DEFAULT_T_PRIME, description="Retained DFT coefficients t'")
    wavelet_family: str = Field("haar", description="haar or db2")
    fusion_dim: int = Field(DEFAULT_D_Z, description="d_z of the fused features")
    trend_dim: int = Field(DEFAULT_TREND_DIM, description="a_J is pooled to this many values")
    use_trend: bool = Field(True, description="Feed the wavelet trend into fusion")
    use_spectrum: bool = Field(True, description="Feed the truncated spectrum into fusion")

    @field_validator("j_max", "t_prime", "fusion_dim", "trend_dim")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        return validate_positive_integer(v, info.field_name)

    @field_validator("wavelet_family")
    @classmethod
    def _family(cls, v: str) -> str:
        return validate_choice(v, SUPPORTED_WAVELETS, "wavelet_family")

    @property
    def feature_dim(self) -> int:
        """Width of the concatenated global feature vector."""
        return self.trend_dim + 2 * self.t_prime


@dataclass(frozen=True)
class DominantFrequency:
    """PSD peak of one signal."""

    frequency_hz: float
    fallback: bool = False


def dominant_frequency(x_row: np.ndarray, f_s: float) -> DominantFrequency:
    """Dominant frequency f_d from the periodogram, DC bin excluded.

    A signal with no power outside DC returns f_s/4 flagged as a fallback.

    Raises:
        ConfigurationError: If T < 4 or f_s ≤ 0
    """
    x_row = np.asarray(x_row, dtype=np.float64)
    if x_row.shape[0] < 4:
        raise ConfigurationError(f"dominant frequency needs T ≥ 4, got {x_row.shape[0]}")
    if f_s <= 0:
        raise ConfigurationError(f"sampling rate must be positive, got {f_s}")

    power = np.abs(np.fft.rfft(x_row)) ** 2
    frequencies = np.fft.rfftfreq(x_row.shape[0], d=1.0 / f_s)
    positive = power[1:]
    if positive.max() <= 1e-20 * max(power[0], 1.0):
        return DominantFrequency(f_s / 4.0, fallback=True)
    return DominantFrequency(float(frequencies[1 + int(np.argmax(positive))]))


def select_level(f_s: float, f_d: float, j_max: int) -> int:
    """Decomposition level J = max(1, min(⌊log2(f_s / 2f_d)⌋, J_max))."""
    if f_s <= 0 or f_d <= 0:
        raise ConfigurationError(f"f_s and f_d must be positive, got f_s={f_s}, f_d={f_d}")
    return max(1, min(math.floor(math.log2(f_s / (2.0 * f_d))), j_max))


def max_level(length: int) -> int:
    """Deepest level a length-T signal supports (T ≥ 2^J)."""
    return max(1, int(math.floor(math.log2(length))))


def wavelet_decompose(x_row: np.ndarray, level: int, family: str = "haar") -> list[np.ndarray]:
    """Multilevel DWT returning [a_J, d_J, …, d_1].

    Raises:
        ConfigurationError: If T < 2^J
    """
    x_row = np.asarray(x_row, dtype=np.float64)
    if x_row.shape[0] < 2**level:
        raise ConfigurationError(
            f"signal of length {x_row.shape[0]} is too short for level {level}; "
            f"reduce the level to at most {max_level(x_row.shape[0])}"
        )
    return pywt.wavedec(x_row, family, mode=WAVELET_MODE, level=level)


def wavelet_reconstruct(coefficients: list[np.ndarray], length: int, family: str = "haar"):
    """Inverse of :func:`wavelet_decompose`, trimmed to ``length``."""
    return pywt.waverec(coefficients, family, mode=WAVELET_MODE)[:length]


@lru_cache(maxsize=64)
def trend_operator(length: int, level: int, family: str) -> np.ndarray:
    """Matrix W with W @ x == a_J(x); the DWT is linear, so W comes from the basis."""
    basis = np.eye(length)
    rows = [wavelet_decompose(basis[i], level, family)[0] for i in range(length)]
    operator = np.stack(rows, axis=1)
    operator.setflags(write=False)
    return operator


def fourier_truncate(x_row: np.ndarray, t_prime: int) -> np.ndarray:
    """First t' coefficients of the unnormalized DFT (DC first).

    Raises:
        ConfigurationError: If t' > T
    """
    x_row = np.asarray(x_row, dtype=np.float64)
    if t_prime > x_row.shape[0]:
        raise ConfigurationError(f"t'={t_prime} exceeds sequence length {x_row.shape[0]}")
    return np.fft.fft(x_row)[:t_prime]


def _stack_features(
    pooled: torch.Tensor, spectrum: torch.Tensor, length: int, config: SpectralConfig
) -> torch.Tensor:
    lead = pooled.shape[:-1]
    scaled = spectrum / math.sqrt(length)
    interleaved = torch.view_as_real(scaled).reshape(*lead, 2 * spectrum.shape[-1])
    if not config.use_trend:
        pooled = torch.zeros_like(pooled)
    if not config.use_spectrum:
        interleaved = torch.zeros_like(interleaved)
    return torch.cat([pooled, interleaved], dim=-1)


def global_features(
    trend: torch.Tensor, spectrum: torch.Tensor, config: SpectralConfig, length: int
) -> torch.Tensor:
    """Concatenate pooled trend and interleaved (re, im) spectrum channels.

    Args:
        trend: (…, len(a_J)) approximation coefficients
        spectrum: (…, t') complex coefficients of the unscaled DFT
        config: Spectral settings (disabled parts contribute zeros)
        length: Sequence length T; the spectrum is scaled by 1/√T

    Returns:
        (…, trend_dim + 2·t') real features
    """
    lead = trend.shape[:-1]
    pooled = F.adaptive_avg_pool1d(trend.reshape(-1, 1, trend.shape[-1]), config.trend_dim)
    return _stack_features(pooled.reshape(*lead, config.trend_dim), spectrum, length, config)


class SpectralFusion(nn.Module):
    """Bias-free projection of global features added to segment embeddings."""

    def __init__(self, config: SpectralConfig):
        super().__init__()
        self.config = config
        self.projection = nn.Linear(config.feature_dim, config.fusion_dim, bias=False)
        self.double()

    def forward(self, features: torch.Tensor, embeddings: torch.Tensor) -> torch.Tensor:
        """Fuse (B, N, F) features into (B, L, N, d_z) embeddings."""
        if embeddings.shape[-1] != self.config.fusion_dim:
            raise DimensionMismatchError(
                f"embeddings have d_z={embeddings.shape[-1]}, fusion expects "
                f"{self.config.fusion_dim}",
                "d_z",
            )
        if features.shape[-1] != self.config.feature_dim:
            raise DimensionMismatchError(
                f"global features have width {features.shape[-1]}, expected "
                f"{self.config.feature_dim}",
                "features",
            )
        return embeddings + self.projection(features).unsqueeze(1)


def series_features(
    normalized: torch.Tensor, levels: torch.Tensor, config: SpectralConfig
) -> torch.Tensor:
    """Differentiable global features for a (B, N, T) batch.

    Args:
        normalized: Instance-normalized inputs
        levels: (B, N) integer wavelet level per variable
        config: Spectral settings

    Returns:
        (B, N, feature_dim) features; the spectrum is scaled by 1/√T
    """
    batch, n_variables, length = normalized.shape
    if config.t_prime > length:
        raise ConfigurationError(f"t'={config.t_prime} exceeds sequence length {length}")
    pooled = torch.zeros(batch, n_variables, config.trend_dim, dtype=normalized.dtype)
    if config.use_trend:
        for level in torch.unique(levels).tolist():
            where = levels == level
            rows = normalized[where]
            if rows.requires_grad:
                operator = torch.from_numpy(
                    trend_operator(length, int(level), config.wavelet_family).copy()
                )
                trend = rows @ operator.T
            else:
                # O(T) direct transform when no gradient is tracked
                trend = torch.from_numpy(
                    np.stack(
                        [
                            wavelet_decompose(row, int(level), config.wavelet_family)[0]
                            for row in rows.numpy()
                        ]
                    )
                )
            chunk = F.adaptive_avg_pool1d(trend.unsqueeze(1), config.trend_dim).squeeze(1)
            pooled = pooled.index_put((where,), chunk)

    spectrum = torch.fft.fft(normalized, dim=-1)[..., : config.t_prime]
    return _stack_features(pooled, spectrum, length, config)


def fuse_global(
    trend: np.ndarray,
    spectrum: np.ndarray,
    segment_embeddings: torch.Tensor,
    fusion: SpectralFusion,
    length: int,
) -> torch.Tensor:
    """Fuse one sequence's global features into its segment embeddings.

    Scaling matches the model's own feature path, so the result equals the
    fusion inside :class:`~segcause.model.network.SegCauseModel`.

    Args:
        trend: (N, len(a_J)) wavelet approximations per variable
        spectrum: (N, t') truncated DFT per variable, as from :func:`fourier_truncate`
        segment_embeddings: (L, N, d_z) segment embeddings
        fusion: Fusion projection
        length: Length T of the series the spectrum was taken from

    Returns:
        X'' with shape (d_z, L, N)

    Raises:
        DimensionMismatchError: If N or t' disagree
        ConfigurationError: If t' exceeds the series length
    """
    if fusion.config.t_prime > length:
        raise ConfigurationError(f"t'={fusion.config.t_prime} exceeds sequence length {length}")
    trend_t = torch.as_tensor(np.asarray(trend, dtype=np.float64))
    spectrum_t = torch.as_tensor(np.asarray(spectrum, dtype=np.complex128))
    if trend_t.shape[0] != segment_embeddings.shape[1] or spectrum_t.shape[0] != trend_t.shape[0]:
        raise DimensionMismatchError(
            f"N disagrees: trend {tuple(trend_t.shape)}, spectrum {tuple(spectrum_t.shape)}, "
            f"embeddings {tuple(segment_embeddings.shape)}",
            "n_variables",
        )
    if spectrum_t.shape[1] != fusion.config.t_prime:
        raise DimensionMismatchError(
            f"spectrum has {spectrum_t.shape[1]} coefficients, fusion expects "
            f"{fusion.config.t_prime}",
            "t_prime",
        )
    features = global_features(trend_t, spectrum_t, fusion.config, length)
    fused = fusion(features.unsqueeze(0), segment_embeddings.unsqueeze(0))[0]
    return fused.permute(2, 0, 1)
