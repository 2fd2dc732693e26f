"""Empirical Lipschitz probing and runtime scaling."""

import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import torch
from torch import nn

from segcause.data.types import CausalMask, LipschitzSample, TimeSeries
from segcause.explainers.attention import extract_attributions, segment_vector
from segcause.model.network import ModelConfig, SegCauseModel, init_model
from segcause.model.reference import ReferenceConfig, init_reference
from segcause.utils.constants import DEFAULT_RUNTIME_ITERATIONS, DEFAULT_RUNTIME_WARMUP
from segcause.utils.exceptions import ConfigurationError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)

Runner = Callable[[], object]
RunnerBuilder = Callable[[int], Runner]


@dataclass(frozen=True)
class LipschitzResult:
    """Per-σ probe summary: trial means plus the spread of the ratio."""

    sample: LipschitzSample
    ratio_std: float
    trial_ratios: tuple[float, ...]

    def as_row(self) -> dict[str, float]:
        return {
            "sigma": self.sample.sigma,
            "input_delta_norm": self.sample.input_delta_norm,
            "output_delta_norm": self.sample.output_delta_norm,
            "ratio": self.sample.ratio,
            "ratio_std": self.ratio_std,
        }


def lipschitz_probe(
    model: SegCauseModel,
    data: list[TimeSeries],
    sigmas: Sequence[float],
    trials: int = 3,
    seed: int = 0,
) -> list[LipschitzResult]:
    """Ratio of explanation change to input change under Gaussian noise.

    g is the per-(variable, segment) mean attribution over the segments of the
    clean input, so clean and noisy explanations share one layout. Each trial
    averages ‖Δ‖₂ and ‖g(X+Δ) − g(X)‖₂ over the data; L_emp is their ratio
    averaged over trials (0 when σ = 0).

    Raises:
        ConfigurationError: If trials < 1 or a σ is negative
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be at least 1, got {trials}")
    if any(s < 0 for s in sigmas):
        raise ConfigurationError(f"noise levels must be non-negative, got {list(sigmas)}")

    clean_boundaries = model.plan_series(data).boundaries
    clean = extract_attributions(model, data)
    clean_g = [segment_vector(clean[b], clean_boundaries[b]) for b in range(len(data))]

    results = []
    for sigma in sigmas:
        inputs, outputs, ratios = [], [], []
        for trial in range(trials):
            rng = np.random.default_rng([seed, trial, int(round(sigma * 1e6))])
            noise = [sigma * rng.standard_normal(s.values.shape) for s in data]
            if sigma == 0:
                input_norm, output_norm = 0.0, 0.0
            else:
                noisy = [s.with_values(s.values + d) for s, d in zip(data, noise)]
                perturbed = extract_attributions(model, noisy)
                input_norm = float(np.mean([np.linalg.norm(d) for d in noise]))
                output_norm = float(
                    np.mean(
                        [
                            np.linalg.norm(segment_vector(perturbed[b], clean_boundaries[b]) - g)
                            for b, g in enumerate(clean_g)
                        ]
                    )
                )
            inputs.append(input_norm)
            outputs.append(output_norm)
            ratios.append(output_norm / input_norm if input_norm > 0 else 0.0)

        ratio_std = float(np.std(ratios, ddof=1)) if trials > 1 else 0.0
        sample = LipschitzSample(
            sigma=float(sigma),
            input_delta_norm=float(np.mean(inputs)),
            output_delta_norm=float(np.mean(outputs)),
            ratio=float(np.mean(ratios)),
        )
        logger.info(f"σ={sigma}: L_emp={sample.ratio:.4f} ± {ratio_std:.4f}")
        results.append(LipschitzResult(sample, ratio_std, tuple(ratios)))
    return results


def runtime_scaling(
    model_builder: RunnerBuilder,
    t_values: Sequence[int],
    batch: int = 8,
    iterations: int = DEFAULT_RUNTIME_ITERATIONS,
    warmup: int = DEFAULT_RUNTIME_WARMUP,
) -> dict[int, float]:
    """Median wall-clock milliseconds per batch for each sequence length.

    Args:
        model_builder: Returns a zero-argument runner processing one batch of length T
        t_values: Strictly increasing lengths
        batch: Batch size, forwarded for logging only (the builder owns the inputs)
        iterations: Timed iterations per T (at least 20)
        warmup: Untimed iterations before timing

    Raises:
        ConfigurationError: If the lengths are not increasing or iterations < 20
    """
    t_values = [int(t) for t in t_values]
    if not t_values or any(b <= a for a, b in zip(t_values, t_values[1:])):
        raise ConfigurationError(f"T values must be strictly increasing, got {t_values}")
    if iterations < DEFAULT_RUNTIME_ITERATIONS:
        raise ConfigurationError(
            f"runtime needs at least {DEFAULT_RUNTIME_ITERATIONS} iterations, got {iterations}"
        )

    timings: dict[int, float] = {}
    for length in t_values:
        runner = model_builder(length)
        for _ in range(warmup):
            runner()
        samples = []
        for _ in range(iterations):
            start = time.perf_counter()
            runner()
            samples.append((time.perf_counter() - start) * 1000.0)
        timings[length] = float(np.median(samples))
        logger.info(f"T={length} (batch {batch}): {timings[length]:.2f} ms")
    return timings


class QuadraticAttentionModel(nn.Module):
    """Single-head self-attention over all T steps; cost grows with T²."""

    def __init__(self, n_variables: int, n_outputs: int, width: int = 16):
        super().__init__()
        self.embed = nn.Linear(n_variables, width)
        self.query = nn.Linear(width, width)
        self.key = nn.Linear(width, width)
        self.value = nn.Linear(width, width)
        self.head = nn.Linear(width, n_outputs)
        self.double()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.embed(x.transpose(1, 2))
        scores = self.query(h) @ self.key(h).transpose(1, 2) / h.shape[-1] ** 0.5
        context = torch.softmax(scores, dim=-1) @ self.value(h)
        return self.head(context.mean(dim=1))


def segcause_runner_builder(
    config: ModelConfig, n_outputs: int, batch: int = 8, seed: int = 0
) -> RunnerBuilder:
    """Runner builder for an untrained model of the given architecture (inference with plan)."""

    def build(length: int) -> Runner:
        reference = init_reference(
            ReferenceConfig(n_variables=config.n_variables, n_outputs=n_outputs), seed
        )
        mask = CausalMask.full(n_outputs, config.n_variables)
        model = init_model(config, mask, reference, seed).eval()
        generator = torch.Generator().manual_seed(seed)
        x = torch.randn(
            batch, config.n_variables, length, dtype=torch.float64, generator=generator
        )

        def run() -> None:
            with torch.no_grad():
                model(x)

        return run

    return build


def quadratic_runner_builder(
    n_variables: int, n_outputs: int, batch: int = 8, seed: int = 0
) -> RunnerBuilder:
    """Runner builder for :class:`QuadraticAttentionModel`."""

    def build(length: int) -> Runner:
        torch.manual_seed(seed)
        model = QuadraticAttentionModel(n_variables, n_outputs).eval()
        x = torch.randn(batch, n_variables, length, dtype=torch.float64)

        def run() -> None:
            with torch.no_grad():
                model(x)

        return run

    return build


def scaling_ratios(timings: dict[int, float]) -> dict[int, Optional[float]]:
    """time(T) / time(previous T) for each consecutive pair (None for the first)."""
    lengths = sorted(timings)
    ratios: dict[int, Optional[float]] = {lengths[0]: None} if lengths else {}
    for previous, current in zip(lengths, lengths[1:]):
        ratios[current] = timings[current] / timings[previous]
    return ratios
