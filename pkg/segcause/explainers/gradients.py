"""Gradient-based and random baseline attributions.

Gradients are taken with the segmentation plan of the explained sequence
held fixed; the model is differentiable in its input only at a fixed plan.
"""

import zlib
from typing import Callable, Literal, Optional

import numpy as np
import torch

from segcause.data.types import TimeSeries
from segcause.explainers.base import BaseExplainer, normalize_attribution
from segcause.explainers.registry import register_explainer
from segcause.model.batching import stack_values
from segcause.model.network import SegCauseModel, SegmentationPlan
from segcause.utils.constants import DEFAULT_IG_STEPS
from segcause.utils.exceptions import ConfigurationError

BaselineMethod = Literal["random", "grad_saliency", "integrated_gradients"]
ScalarFn = Callable[[torch.Tensor], torch.Tensor]


def integrated_gradients(
    f: ScalarFn, x: torch.Tensor, baseline: Optional[torch.Tensor] = None, steps: int = 32
) -> torch.Tensor:
    """Path-integrated gradients along the straight line from ``baseline`` to ``x``.

    IG = (x − x̄) ⊙ (1/steps) Σ_{s=1..steps} ∇f(x̄ + (s/steps)(x − x̄)).

    Args:
        f: Maps a stack of inputs (S, …) to S scalars
        x: Input (…)
        baseline: Reference input x̄ (zeros when omitted)
        steps: Riemann steps

    Returns:
        Signed attributions shaped like ``x``

    Raises:
        ConfigurationError: If steps < 1
    """
    if steps < 1:
        raise ConfigurationError(f"integrated gradients needs steps ≥ 1, got {steps}")
    x = torch.as_tensor(x, dtype=torch.float64)
    if baseline is None:
        baseline = torch.zeros_like(x)
    baseline = torch.as_tensor(baseline, dtype=x.dtype)
    alphas = torch.arange(1, steps + 1, dtype=x.dtype) / steps
    path = baseline.unsqueeze(0) + alphas.view(-1, *([1] * x.dim())) * (x - baseline).unsqueeze(0)
    path.requires_grad_(True)
    (grads,) = torch.autograd.grad(f(path).sum(), path)
    return (x - baseline) * grads.mean(dim=0)


def gradient_saliency(f: ScalarFn, x: torch.Tensor) -> torch.Tensor:
    """|∇f(x)|."""
    point = torch.as_tensor(x, dtype=torch.float64).clone().unsqueeze(0).requires_grad_(True)
    (grads,) = torch.autograd.grad(f(point).sum(), point)
    return grads[0].abs()


def explained_output(
    model: SegCauseModel, series: TimeSeries, plan: Optional[SegmentationPlan] = None
) -> ScalarFn:
    """Scalar model output explained for ``series`` at its own fixed plan.

    Classification explains the logit of the predicted class; regression
    explains the mean prediction.
    """
    plan = plan if plan is not None else model.plan_series([series])
    x = stack_values([series])
    with torch.no_grad():
        predictions = model.run(x, plan).predictions[0]
    target = int(torch.argmax(predictions)) if model.config.task == "classification" else None

    def f(points: torch.Tensor) -> torch.Tensor:
        output = model.run(points, plan.subset([0] * points.shape[0])).predictions
        return output.mean(dim=1) if target is None else output[:, target]

    return f


def baseline_attribution(
    model: SegCauseModel,
    x: TimeSeries,
    method: BaselineMethod,
    steps: int = DEFAULT_IG_STEPS,
    seed: int = 0,
) -> np.ndarray:
    """Baseline importance map of one sequence, normalized to sum 1.

    Raises:
        ConfigurationError: For unknown methods or steps < 1
    """
    if method == "random":
        rng = np.random.default_rng([seed, zlib.crc32(x.id.encode())])
        return normalize_attribution(rng.random(x.values.shape))
    if method == "grad_saliency":
        values = gradient_saliency(explained_output(model, x), stack_values([x])[0])
    elif method == "integrated_gradients":
        f = explained_output(model, x)
        values = integrated_gradients(f, stack_values([x])[0], None, steps)
    else:
        raise ConfigurationError(f"unknown baseline method: {method}")
    return normalize_attribution(values.detach().numpy())


@register_explainer("random")
class RandomExplainer(BaseExplainer):
    """Uniform noise, normalized."""

    def attribute(self, model: SegCauseModel, series: TimeSeries) -> np.ndarray:
        return baseline_attribution(model, series, "random", seed=self.seed)


@register_explainer("grad_saliency")
class GradSaliencyExplainer(BaseExplainer):
    """Absolute input gradient."""

    def attribute(self, model: SegCauseModel, series: TimeSeries) -> np.ndarray:
        return baseline_attribution(model, series, "grad_saliency")


@register_explainer("integrated_gradients")
class IntegratedGradientsExplainer(BaseExplainer):
    """Integrated gradients from a zero baseline."""

    def __init__(self, seed: int = 0, steps: int = DEFAULT_IG_STEPS):
        super().__init__(seed)
        if steps < 1:
            raise ConfigurationError(f"integrated gradients needs steps ≥ 1, got {steps}")
        self.steps = steps

    def attribute(self, model: SegCauseModel, series: TimeSeries) -> np.ndarray:
        return baseline_attribution(model, series, "integrated_gradients", self.steps)
