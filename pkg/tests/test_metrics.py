"""Tests for ranking metrics and stability."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from segcause.evaluation.metrics import auprc, auroc, mse, stability
from segcause.utils.exceptions import ConfigurationError, MetricUndefinedError


def _pairwise_auroc(scores, labels):
    positives = [s for s, y in zip(scores, labels) if y == 1]
    negatives = [s for s, y in zip(scores, labels) if y == 0]
    wins = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in positives for n in negatives)
    return wins / (len(positives) * len(negatives))


class TestAuroc:
    """Tests for auroc."""

    def test_hand_computed(self):
        """Test three of four positive/negative pairs are ordered correctly."""
        assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)

    @given(
        st.lists(
            st.tuples(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]), st.integers(0, 1)),
            min_size=2,
            max_size=10,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_matches_pairwise_count(self, pairs):
        """Test agreement with the brute-force pair count, ties included."""
        scores, labels = zip(*pairs)
        assume(0 < sum(labels) < len(labels))
        assert auroc(scores, labels) == pytest.approx(_pairwise_auroc(scores, labels))

    def test_single_class(self):
        """Test one class leaves AUROC undefined."""
        with pytest.raises(MetricUndefinedError, match="one class"):
            auroc([0.1, 0.2], [1, 1])

    def test_non_binary_labels(self):
        """Test labels must be 0/1."""
        with pytest.raises(MetricUndefinedError, match="binary"):
            auroc([0.1, 0.2], [0, 2])


class TestAuprc:
    """Tests for auprc."""

    def test_perfect_ranking(self):
        """Test positives ranked first give AP = 1."""
        assert auprc([0.9, 0.8, 0.1], [1, 1, 0]) == pytest.approx(1.0)

    def test_reversed_ranking(self):
        """Test a lone positive ranked last gives AP = 1/4."""
        assert auprc([0.1, 0.2, 0.3, 0.4], [1, 0, 0, 0]) == pytest.approx(0.25)

    def test_no_positives(self):
        """Test AP is undefined without positives."""
        with pytest.raises(MetricUndefinedError, match="positive"):
            auprc([0.1, 0.2], [0, 0])

    def test_length_mismatch(self):
        """Test scores and labels must align."""
        with pytest.raises(MetricUndefinedError):
            auprc([0.1], [0, 1])


class TestMse:
    """Tests for mse."""

    def test_by_hand(self):
        """Test the mean of squared differences."""
        assert mse(np.array([[1.0, 3.0]]), np.array([[0.0, 1.0]])) == pytest.approx(2.5)

    def test_shape_mismatch(self):
        """Test differently shaped inputs are refused."""
        with pytest.raises(MetricUndefinedError):
            mse(np.zeros(2), np.zeros(3))


class TestStability:
    """Tests for stability."""

    def test_hand_computed(self):
        """Test sample std over mean of five seeds."""
        result = stability([0.10, 0.12, 0.11, 0.09, 0.13])
        assert result.defined
        assert result.coefficient == pytest.approx(math.sqrt(0.001 / 4) / 0.11, rel=1e-9)
        assert result.coefficient == pytest.approx(0.1437, abs=1e-4)

    def test_non_positive_mean(self):
        """Test a nonpositive mean is reported as undefined."""
        result = stability([0.1, -0.2])
        assert not result.defined
        assert math.isnan(result.coefficient)

    def test_needs_two_seeds(self):
        """Test a single seed is a configuration error."""
        with pytest.raises(ConfigurationError, match="at least 2"):
            stability([0.1])
