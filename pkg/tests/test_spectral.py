"""Tests for spectral features and their fusion."""

import math

import numpy as np
import pytest
import torch
from pydantic import ValidationError

from segcause.model.spectral import (
    SpectralConfig,
    SpectralFusion,
    dominant_frequency,
    fourier_truncate,
    fuse_global,
    global_features,
    max_level,
    select_level,
    series_features,
    trend_operator,
    wavelet_decompose,
    wavelet_reconstruct,
)
from segcause.utils.exceptions import ConfigurationError, DimensionMismatchError


class TestSelectLevel:
    """Tests for select_level."""

    @pytest.mark.parametrize(
        "f_s, f_d, j_max, expected",
        [(128, 8, 5, 3), (100, 40, 5, 1), (1024, 1, 4, 4)],
    )
    def test_hand_computed_levels(self, f_s, f_d, j_max, expected):
        """Test the level rule, its lower clamp and its upper clamp."""
        assert select_level(f_s, f_d, j_max) == expected

    def test_non_positive_frequency(self):
        """Test frequencies must be positive."""
        with pytest.raises(ConfigurationError):
            select_level(100, 0, 4)

    def test_max_level(self):
        """Test the deepest level a length supports."""
        assert max_level(128) == 7
        assert max_level(100) == 6
        assert max_level(2) == 1


class TestDominantFrequency:
    """Tests for dominant_frequency."""

    def test_pure_tone(self):
        """Test the periodogram peak of a sampled sine."""
        t = np.arange(128) / 128.0
        result = dominant_frequency(np.sin(2 * np.pi * 8 * t), 128.0)
        assert result.frequency_hz == pytest.approx(8.0)
        assert not result.fallback

    def test_constant_signal_falls_back(self):
        """Test a signal with only DC power returns f_s/4."""
        result = dominant_frequency(np.full(16, 3.0), 100.0)
        assert result.frequency_hz == 25.0
        assert result.fallback

    def test_too_short(self):
        """Test T < 4 is rejected."""
        with pytest.raises(ConfigurationError, match="T ≥ 4"):
            dominant_frequency(np.ones(3), 1.0)


class TestWavelets:
    """Tests for the wavelet transform."""

    def test_haar_by_hand(self):
        """Test a hand-computed one-level Haar transform."""
        approximation, detail = wavelet_decompose(np.ones(4), 1, "haar")
        np.testing.assert_allclose(approximation, [math.sqrt(2), math.sqrt(2)])
        np.testing.assert_allclose(detail, [0.0, 0.0], atol=1e-15)

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_perfect_reconstruction(self, family, rng):
        """Test decompose-then-reconstruct over 200 random signals."""
        for _ in range(200):
            level = int(rng.integers(1, 5))
            length = (2**level) * int(rng.integers(2, 9))
            signal = rng.standard_normal(length)
            coefficients = wavelet_decompose(signal, level, family)
            restored = wavelet_reconstruct(coefficients, length, family)
            rms = np.sqrt(np.mean((restored - signal) ** 2))
            assert rms < 1e-8

    def test_level_too_deep(self):
        """Test a level beyond log2(T) is rejected with a hint."""
        with pytest.raises(ConfigurationError, match="at most 3"):
            wavelet_decompose(np.ones(8), 4)

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_trend_operator_matches_transform(self, family, rng):
        """Test the linear trend operator reproduces a_J."""
        signal = rng.standard_normal(32)
        operator = trend_operator(32, 3, family)
        np.testing.assert_allclose(
            operator @ signal, wavelet_decompose(signal, 3, family)[0], atol=1e-12
        )


class TestFourierTruncate:
    """Tests for fourier_truncate."""

    def test_full_spectrum_inverts(self, rng):
        """Test t' = T keeps the whole spectrum."""
        signal = rng.standard_normal(50)
        coefficients = fourier_truncate(signal, 50)
        np.testing.assert_allclose(np.fft.ifft(coefficients).real, signal, atol=1e-8)

    def test_dc_first(self):
        """Test the first coefficient is the sum of the signal."""
        assert fourier_truncate(np.array([1.0, 2.0, 3.0, 4.0]), 2)[0] == 10.0

    def test_too_many_coefficients(self):
        """Test t' > T is rejected."""
        with pytest.raises(ConfigurationError, match="exceeds"):
            fourier_truncate(np.ones(4), 5)


class TestSeriesFeatures:
    """Tests for the batched differentiable features."""

    def _config(self, **kwargs):
        return SpectralConfig(j_max=3, t_prime=4, trend_dim=4, fusion_dim=8, **kwargs)

    def test_gradient_path_matches_direct_transform(self, rng):
        """Test the operator path (with grad) equals the pywt path (without)."""
        values = torch.from_numpy(rng.standard_normal((2, 3, 32)))
        levels = torch.tensor([[1, 2, 3], [3, 3, 1]])
        config = self._config()
        direct = series_features(values, levels, config)
        tracked = series_features(values.clone().requires_grad_(True), levels, config)
        torch.testing.assert_close(tracked.detach(), direct, atol=1e-12, rtol=0)

    def test_spectrum_scaling(self, rng):
        """Test spectrum channels are the DFT scaled by 1/√T."""
        values = torch.from_numpy(rng.standard_normal((1, 1, 16)))
        features = series_features(values, torch.tensor([[1]]), self._config())
        spectrum = np.fft.fft(values[0, 0].numpy())[:4] / 4.0
        expected = np.stack([spectrum.real, spectrum.imag], axis=1).reshape(-1)
        np.testing.assert_allclose(features[0, 0, 4:].numpy(), expected, atol=1e-12)

    def test_disabled_parts_are_zero(self, rng):
        """Test the ablation switches zero their channels."""
        values = torch.from_numpy(rng.standard_normal((1, 2, 16)))
        levels = torch.ones((1, 2), dtype=torch.int64)
        no_trend = series_features(values, levels, self._config(use_trend=False))
        no_spectrum = series_features(values, levels, self._config(use_spectrum=False))
        assert torch.all(no_trend[..., :4] == 0)
        assert torch.all(no_spectrum[..., 4:] == 0)

    def test_t_prime_too_large(self):
        """Test t' beyond T is rejected."""
        with pytest.raises(ConfigurationError):
            series_features(
                torch.zeros(1, 1, 3), torch.ones(1, 1, dtype=torch.int64), self._config()
            )

    def test_unknown_family(self):
        """Test unsupported wavelet families are rejected."""
        with pytest.raises(ValidationError, match="wavelet_family"):
            SpectralConfig(wavelet_family="sym8")


class TestFusion:
    """Tests for SpectralFusion and fuse_global."""

    def test_fusion_broadcasts_over_segments(self):
        """Test every segment of a variable gets the same additive term."""
        config = SpectralConfig(j_max=2, t_prime=2, trend_dim=2, fusion_dim=3)
        fusion = SpectralFusion(config)
        features = torch.randn(1, 2, config.feature_dim, dtype=torch.float64)
        embeddings = torch.zeros(1, 4, 2, 3, dtype=torch.float64)
        fused = fusion(features, embeddings)
        torch.testing.assert_close(fused[0, 0], fused[0, 3])

    def test_width_mismatch(self):
        """Test embeddings of the wrong width are rejected."""
        config = SpectralConfig(t_prime=2, trend_dim=2, fusion_dim=3)
        fusion = SpectralFusion(config)
        with pytest.raises(DimensionMismatchError, match="d_z"):
            fusion(torch.zeros(1, 1, 6, dtype=torch.float64), torch.zeros(1, 1, 1, 5))

    def test_fuse_global_layout(self, rng):
        """Test one sequence is fused into the d_z × L × N layout."""
        config = SpectralConfig(t_prime=2, trend_dim=2, fusion_dim=3)
        fusion = SpectralFusion(config)
        trend = rng.standard_normal((2, 4))
        spectrum = np.fft.fft(rng.standard_normal((2, 8)))[:, :2]
        segments = torch.zeros(5, 2, 3, dtype=torch.float64)
        fused = fuse_global(trend, spectrum, segments, fusion, length=8)
        assert tuple(fused.shape) == (3, 5, 2)

    def test_fuse_global_t_prime_mismatch(self, rng):
        """Test a spectrum with the wrong number of coefficients is rejected."""
        fusion = SpectralFusion(SpectralConfig(t_prime=2, trend_dim=2, fusion_dim=3))
        with pytest.raises(DimensionMismatchError, match="t_prime|coefficients"):
            fuse_global(
                np.zeros((1, 4)),
                np.zeros((1, 3), dtype=complex),
                torch.zeros(1, 1, 3, dtype=torch.float64),
                fusion,
                length=8,
            )

    def test_global_features_match_model_path(self, rng):
        """Test the standalone feature path scales the spectrum like the batched one."""
        config = SpectralConfig(j_max=2, t_prime=3, trend_dim=4, fusion_dim=3)
        values = torch.from_numpy(rng.standard_normal((1, 2, 16)))
        levels = torch.tensor([[1, 2]])
        batched = series_features(values, levels, config)[0]

        rows = values[0].numpy()
        trend = [wavelet_decompose(row, int(j), "haar")[0] for row, j in zip(rows, (1, 2))]
        spectrum = np.stack([fourier_truncate(row, 3) for row in rows])
        standalone = torch.cat(
            [
                global_features(
                    torch.from_numpy(t).unsqueeze(0),
                    torch.from_numpy(s).unsqueeze(0),
                    config,
                    length=16,
                )
                for t, s in zip(trend, spectrum)
            ]
        )
        torch.testing.assert_close(standalone, batched)

    def test_fuse_global_rejects_short_series(self, rng):
        """Test t' longer than the series is a configuration error."""
        fusion = SpectralFusion(SpectralConfig(t_prime=4, trend_dim=2, fusion_dim=3))
        with pytest.raises(ConfigurationError, match="exceeds"):
            fuse_global(
                np.zeros((1, 2)),
                np.zeros((1, 4), dtype=complex),
                torch.zeros(1, 1, 3, dtype=torch.float64),
                fusion,
                length=2,
            )
