"""Statistical acceptance runs on trained models.

These train full-size models on synthetic SCM data and are deselected by
default; run them with ``pytest -m slow``.
"""

import numpy as np
import pytest

from segcause.data.scm import MotifSpec, ScmSpec, generate_scm, random_mask
from segcause.evaluation.faithfulness import (
    MaskingProtocol,
    mask_and_score,
    mask_robustness,
    score_model,
)
from segcause.evaluation.metrics import stability
from segcause.explainers.attention import extract_attributions
from segcause.model.batching import infer_task
from segcause.model.network import ModelConfig, init_model
from segcause.model.reference import ReferenceTrainingConfig, train_reference
from segcause.training.objectives import LossWeights
from segcause.training.trainer import TrainingConfig, train

pytestmark = pytest.mark.slow

MOTIF_SPEC = ScmSpec(
    n_variables=3,
    length=128,
    motif=MotifSpec(window_start=40, window_end=60, amplitude=3.0),
)
FORECAST_SPEC = ScmSpec(
    n_variables=4,
    length=128,
    task="forecasting",
    adjacency=[[1, 0, 0, 0], [1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]],
    noise_std=0.1,
    motif=None,
)


def _trained_with_trace(series, mask, seed, epochs=30, losses=None):
    task, _ = infer_task(series)
    reference = train_reference(series, ReferenceTrainingConfig(seed=seed))
    model = init_model(ModelConfig(n_variables=mask.n_variables, task=task), mask, reference, seed)
    config = TrainingConfig(
        epochs=epochs, learning_rate=0.01, seed=seed, losses=losses or LossWeights()
    )
    result = train(model, series, config)
    return result.model, result.trace


def _trained(series, mask, seed, epochs=30):
    return _trained_with_trace(series, mask, seed, epochs)[0]


class TestFaithfulness:
    """Masking the model's most attributed inputs hurts most."""

    def test_top_beats_random_and_bottom(self):
        """Test top-k masking hurts AUROC ≥ 2× random on average and ≥ bottom per seed."""
        drops = {"top": [], "bottom": [], "random": []}
        for seed in range(5):
            series, mask = generate_scm(MOTIF_SPEC, 700, seed=seed)
            train_split, test_split = series[:500], series[500:]
            model = _trained(train_split, mask, seed)
            attributions = extract_attributions(model, test_split)
            for target in drops:
                protocol = MaskingProtocol(k_percent=15, target=target, seed=seed)
                entry = mask_and_score(model, test_split, protocol, "auroc", attributions)
                drops[target].append(-entry.delta_percent)

        assert np.mean(drops["top"]) >= 2.0 * np.mean(drops["random"])
        for top, bottom in zip(drops["top"], drops["bottom"]):
            assert top >= bottom


class TestMaskRobustness:
    """Forecasting error grows with the distance from the true mask."""

    def test_error_tracks_mask_distance(self):
        """Test a single flip raises MSE and Spearman ρ exceeds 0.8 in every seed."""
        for seed in range(5):
            series, mask = generate_scm(FORECAST_SPEC, 700, seed=seed)
            model = _trained(series[:500], mask, seed=seed)
            rows, rho = mask_robustness(model, series[500:], [1, 2, 4, 8], seed=seed)
            assert [r["distance"] for r in rows] == [0, 1, 2, 4, 8]
            assert rows[1]["mse"] > rows[0]["mse"]
            assert rho > 0.8


class TestAblationDirection:
    """Dropping the auxiliary losses or the true mask makes the model worse."""

    def test_auxiliary_losses_help(self):
        """Test β = γ = 0 weakens degradation and separation and loosens stability."""
        degradation = {"full": [], "ablated": []}
        separation = {"full": [], "ablated": []}
        ablated_losses = LossWeights(beta_gamma_off=True)
        for seed in range(5):
            series, mask = generate_scm(MOTIF_SPEC, 700, seed=seed)
            train_split, test_split = series[:500], series[500:]
            for name, losses in (("full", LossWeights()), ("ablated", ablated_losses)):
                model, trace = _trained_with_trace(train_split, mask, seed, losses=losses)
                protocol = MaskingProtocol(k_percent=15, target="top", seed=seed)
                entry = mask_and_score(model, test_split, protocol, "auroc")
                degradation[name].append(-entry.delta_percent)
                separation[name].append(trace[-1].separation)

        pairs = zip(degradation["full"], degradation["ablated"])
        assert sum(full > ablated for full, ablated in pairs) >= 4
        pairs = zip(separation["full"], separation["ablated"])
        assert sum(full > ablated for full, ablated in pairs) >= 4
        full, ablated = stability(degradation["full"]), stability(degradation["ablated"])
        assert full.defined
        assert not ablated.defined or full.coefficient <= ablated.coefficient

    def test_random_mask_raises_forecast_error(self):
        """Test training with a random mask gives higher test MSE than the true mask."""
        worse = 0
        for seed in range(5):
            series, mask = generate_scm(FORECAST_SPEC, 700, seed=seed)
            train_split, test_split = series[:500], series[500:]
            shuffled = random_mask(mask.n_outputs, mask.n_variables, 0.5, seed=seed)
            true_mse = score_model(_trained(train_split, mask, seed), test_split, "mse")
            random_mse = score_model(_trained(train_split, shuffled, seed), test_split, "mse")
            worse += random_mse > true_mse
        assert worse >= 4
