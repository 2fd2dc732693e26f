"""Tests for the synthetic SCM generator and mask utilities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from segcause.data.scm import (
    MotifSpec,
    ScmSpec,
    draw_weights,
    generate_scm,
    perturb_mask,
    random_mask,
)
from segcause.data.types import CausalMask, MaskSource
from segcause.utils.constants import SCM_SPECTRAL_RADIUS
from segcause.utils.exceptions import ConfigurationError, NumericDivergenceError


class TestScmSpec:
    """Tests for ScmSpec validation."""

    def test_defaults(self):
        """Test the default spec is a 3-variable classification task."""
        spec = ScmSpec()
        assert spec.n_variables == 3
        assert spec.task == "classification"

    def test_adjacency_shape(self):
        """Test the adjacency must be N×N."""
        with pytest.raises(ValidationError, match="adjacency must be 2x2"):
            ScmSpec(n_variables=2, adjacency=[[1, 0, 0]])

    def test_forecasting_needs_parents(self):
        """Test every forecast variable needs a parent."""
        with pytest.raises(ValidationError, match="at least one parent"):
            ScmSpec(n_variables=2, task="forecasting", adjacency=[[1, 0], [0, 0]], motif=None)

    def test_motif_must_fit(self):
        """Test the motif window plus jitter fits in the sequence."""
        with pytest.raises(ValidationError, match="fit inside"):
            ScmSpec(length=16, motif=MotifSpec(window_start=10, window_end=15, jitter=2))

    def test_motif_window_order(self):
        """Test motif windows must be non-empty."""
        with pytest.raises(ValidationError, match="start < end"):
            MotifSpec(window_start=5, window_end=5)


class TestGenerateScm:
    """Tests for generate_scm."""

    def test_deterministic(self, classification_spec):
        """Test identical seeds give bit-identical datasets."""
        first, mask_a = generate_scm(classification_spec, 5, seed=3)
        second, mask_b = generate_scm(classification_spec, 5, seed=3)
        assert first == second
        assert mask_a == mask_b

    def test_seed_changes_data(self, classification_spec):
        """Test different seeds give different data."""
        first, _ = generate_scm(classification_spec, 3, seed=0)
        second, _ = generate_scm(classification_spec, 3, seed=1)
        assert first != second

    def test_classification_outputs(self, classification_data, classification_spec):
        """Test labels, ids and the all-parents mask."""
        series, mask = classification_data
        assert all(s.label in (0, 1) for s in series)
        assert series[0].id == "seq00000"
        assert all(s.values.shape == (2, 32) for s in series)
        assert mask == CausalMask.full(2, 2, MaskSource.GROUND_TRUTH_SCM)

    def test_forecasting_mask_is_adjacency(self, forecasting_data):
        """Test the forecasting mask equals the adjacency."""
        series, mask = forecasting_data
        np.testing.assert_array_equal(mask.entries, [[1, 0, 0], [1, 1, 0], [0, 1, 1]])
        assert all(s.targets.shape == (3,) for s in series)
        assert all(s.label is None for s in series)

    def test_motif_planted_in_window(self):
        """Test class-1 sequences carry the burst only inside its window."""
        spec = ScmSpec(
            n_variables=1,
            length=40,
            noise_std=0.0,
            initial_state="zero",
            motif=MotifSpec(window_start=10, window_end=20, amplitude=5.0),
        )
        series, _ = generate_scm(spec, 20, seed=0)
        positives = [s for s in series if s.label == 1]
        negatives = [s for s in series if s.label == 0]
        assert positives and negatives
        for s in negatives:
            np.testing.assert_array_equal(s.values, 0.0)
        for s in positives:
            assert np.abs(s.values[0, 10:20]).max() > 1.0
            np.testing.assert_array_equal(s.values[0, :10], 0.0)
            np.testing.assert_array_equal(s.values[0, 20:], 0.0)

    def test_identity_adjacency_decouples_variables(self):
        """Test unlinked variables stay uncorrelated at lag 1."""
        spec = ScmSpec(
            n_variables=2,
            length=200,
            adjacency=[[1, 0], [0, 1]],
            task="forecasting",
            noise_std=1.0,
            motif=None,
        )
        series, _ = generate_scm(spec, 100, seed=0)
        correlations = [
            np.corrcoef(s.values[0, :-1], s.values[1, 1:])[0, 1] for s in series
        ]
        assert abs(np.mean(correlations)) < 0.05

    def test_explosion_detected(self):
        """Test unstable dynamics raise instead of overflowing."""
        spec = ScmSpec(n_variables=1, length=64, noise_std=0.0, motif=None, burn_in=0)
        with pytest.MonkeyPatch.context() as patch:
            patch.setattr(
                "segcause.data.scm.draw_weights", lambda adjacency, rng: 2.0 * adjacency
            )
            with pytest.raises(NumericDivergenceError, match="exploded"):
                generate_scm(spec, 1, seed=0)

    @given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**16))
    @settings(max_examples=30, deadline=None)
    def test_weights_are_stable(self, n_variables, seed):
        """Test drawn weights never exceed the target spectral radius."""
        rng = np.random.default_rng(seed)
        weights = draw_weights(np.ones((n_variables, n_variables), dtype=np.int64), rng)
        radius = np.max(np.abs(np.linalg.eigvals(weights)))
        assert radius <= SCM_SPECTRAL_RADIUS + 1e-12


class TestPerturbMask:
    """Tests for perturb_mask."""

    def test_exact_flip_count(self):
        """Test the Frobenius distance equals the number of flips."""
        mask = CausalMask([[1, 0, 0], [1, 1, 0], [0, 1, 1]])
        for flips in (1, 2, 4):
            perturbed = perturb_mask(mask, flips, seed=flips)
            assert perturbed.frobenius_distance_sq(mask) == flips
            assert perturbed.source is MaskSource.PERTURBED

    def test_zero_flips(self):
        """Test zero flips keeps the entries."""
        mask = CausalMask([[1, 0]])
        np.testing.assert_array_equal(perturb_mask(mask, 0, seed=0).entries, mask.entries)

    def test_rare_feasible_flip_count(self):
        """Test a flip count with very few valid placements is still placed."""
        mask = CausalMask(np.ones((20, 2), dtype=np.int64))
        for seed in range(5):
            perturbed = perturb_mask(mask, 20, seed=seed)
            assert perturbed.frobenius_distance_sq(mask) == 20
            np.testing.assert_array_equal(perturbed.entries.sum(axis=1), np.ones(20))

    @given(
        n_outputs=st.integers(1, 5),
        n_variables=st.integers(1, 5),
        seed=st.integers(0, 1000),
        data=st.data(),
    )
    @settings(max_examples=60, deadline=None)
    def test_every_feasible_count_is_placed(self, n_outputs, n_variables, seed, data):
        """Test any count up to the mask's capacity is toggled exactly."""
        mask = random_mask(n_outputs, n_variables, 0.6, seed)
        full_rows = int((mask.entries.sum(axis=1) == n_variables).sum())
        flips = data.draw(st.integers(0, mask.entries.size - full_rows))
        perturbed = perturb_mask(mask, flips, seed=seed)
        assert perturbed.frobenius_distance_sq(mask) == flips
        assert (perturbed.entries.sum(axis=1) > 0).all()

    def test_impossible_flip_count(self):
        """Test flips that must empty a row are refused."""
        mask = CausalMask([[1, 1], [1, 1]])
        with pytest.raises(ConfigurationError, match="without emptying a row"):
            perturb_mask(mask, 3, seed=0)

    def test_negative_flips(self):
        """Test negative flip counts are rejected."""
        with pytest.raises(ConfigurationError):
            perturb_mask(CausalMask([[1]]), -1, seed=0)


class TestRandomMask:
    """Tests for random_mask."""

    @given(
        st.integers(min_value=1, max_value=5),
        st.integers(min_value=1, max_value=5),
        st.floats(min_value=0.01, max_value=1.0),
        st.integers(min_value=0, max_value=1000),
    )
    @settings(max_examples=50, deadline=None)
    def test_rows_never_empty(self, n_outputs, n_variables, density, seed):
        """Test every row of a random mask has a parent."""
        mask = random_mask(n_outputs, n_variables, density, seed)
        assert (mask.entries.sum(axis=1) > 0).all()
        assert mask.source is MaskSource.RANDOM

    def test_bad_density(self):
        """Test density must be in (0, 1]."""
        with pytest.raises(ConfigurationError, match="density"):
            random_mask(2, 2, 0.0, seed=0)
