"""Synthetic structural-causal-model data and causal mask utilities.

The generator is a lag-1 vector autoregression whose adjacency doubles as
the ground-truth causal mask. Optional motif injection plants
class-discriminative bursts in known windows.
"""

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from segcause.config.validators import (
    validate_non_negative_real,
    validate_positive_integer,
    validate_positive_real,
)
from segcause.data.types import CausalMask, MaskSource, TimeSeries
from segcause.utils.constants import SCM_EXPLOSION_LIMIT, SCM_SPECTRAL_RADIUS, SCM_WEIGHT_RANGE
from segcause.utils.exceptions import ConfigurationError, NumericDivergenceError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)

MAX_RESAMPLE_ATTEMPTS = 10_000


class MotifSpec(BaseModel):
    """A burst planted in ``[window_start, window_end)`` of the chosen variables."""

    model_config = ConfigDict(frozen=True)

    window_start: int = Field(10, description="First time step of the burst window")
    window_end: int = Field(20, description="End (exclusive) of the burst window")
    amplitude: float = Field(3.0, description="Burst amplitude")
    frequency: float = Field(0.25, description="Burst oscillation in cycles per sample")
    variables: Optional[list[int]] = Field(None, description="Variables carrying the burst")
    jitter: int = Field(0, description="Maximum random shift of the window (± steps)")
    positive_class: int = Field(1, description="Class whose sequences carry the burst")

    @model_validator(mode="after")
    def _check_window(self) -> "MotifSpec":
        if not 0 <= self.window_start < self.window_end:
            raise ValueError(
                f"motif window must satisfy 0 ≤ start < end, got [{self.window_start}, "
                f"{self.window_end})"
            )
        if self.jitter < 0:
            raise ValueError("motif jitter must be non-negative")
        return self


class ScmSpec(BaseModel):
    """Configuration of the synthetic lag-1 SCM."""

    model_config = ConfigDict(frozen=True)

    n_variables: int = Field(3, description="Number of variables N")
    length: int = Field(128, description="Sequence length T")
    adjacency: Optional[list[list[int]]] = Field(
        None, description="Binary N×N lag-1 adjacency, row i lists the parents of x_i"
    )
    edge_density: float = Field(
        0.3, description="Off-diagonal edge probability when adjacency is drawn"
    )
    noise_std: float = Field(0.1, description="Standard deviation of additive Gaussian noise")
    link_function: Literal["linear", "tanh"] = Field("linear")
    task: Literal["classification", "forecasting"] = Field("classification")
    n_classes: int = Field(2, description="Number of classes for classification")
    motif: Optional[MotifSpec] = Field(default_factory=MotifSpec)
    sampling_rate_hz: float = Field(1.0)
    initial_state: Literal["random", "zero"] = Field("random")
    burn_in: int = Field(20, description="Discarded warm-up steps")

    @field_validator("n_variables", "n_classes")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        return validate_positive_integer(v, info.field_name)

    @field_validator("length")
    @classmethod
    def _length(cls, v: int) -> int:
        v = validate_positive_integer(v, "length")
        if v < 2:
            raise ValueError("length must be at least 2")
        return v

    @field_validator("noise_std")
    @classmethod
    def _noise(cls, v: float) -> float:
        return validate_non_negative_real(v, "noise_std")

    @field_validator("sampling_rate_hz")
    @classmethod
    def _rate(cls, v: float) -> float:
        return validate_positive_real(v, "sampling_rate_hz")

    @model_validator(mode="after")
    def _check_consistency(self) -> "ScmSpec":
        if self.adjacency is not None:
            matrix = np.asarray(self.adjacency)
            if matrix.shape != (self.n_variables, self.n_variables):
                raise ValueError(f"adjacency must be {self.n_variables}x{self.n_variables}")
            if not np.isin(matrix, (0, 1)).all():
                raise ValueError("adjacency entries must be 0 or 1")
            if self.task == "forecasting" and (matrix.sum(axis=1) == 0).any():
                raise ValueError("forecasting needs at least one parent per variable")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        if self.motif is not None and self.task == "classification":
            if self.motif.window_end + self.motif.jitter > self.length:
                raise ValueError("motif window (plus jitter) must fit inside the sequence")
            if self.motif.window_start - self.motif.jitter < 0:
                raise ValueError("motif jitter would move the window before t=0")
            bad = [v for v in self.motif.variables or [] if not 0 <= v < self.n_variables]
            if bad:
                raise ValueError(f"motif variables out of range: {bad}")
        return self


def draw_adjacency(n_variables: int, edge_density: float, rng: np.random.Generator) -> np.ndarray:
    """Random lag-1 adjacency with self-loops and Bernoulli off-diagonal edges."""
    adjacency = (rng.random((n_variables, n_variables)) < edge_density).astype(np.int64)
    np.fill_diagonal(adjacency, 1)
    return adjacency


def draw_weights(adjacency: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Edge weights uniform in [0.3, 0.7], rescaled to spectral radius ≤ 0.9."""
    low, high = SCM_WEIGHT_RANGE
    weights = adjacency * rng.uniform(low, high, size=adjacency.shape)
    radius = float(np.max(np.abs(np.linalg.eigvals(weights)))) if weights.any() else 0.0
    if radius > SCM_SPECTRAL_RADIUS:
        weights *= SCM_SPECTRAL_RADIUS / radius
    return weights


def generate_scm(spec: ScmSpec, count: int, seed: int) -> tuple[list[TimeSeries], CausalMask]:
    """Generate sequences from the lag-1 SCM.

    x_i[t] = link(Σ_j A[i,j]·w_ij·x_j[t−1]) + ε_i[t]. Classification
    sequences get a label (motif present for ``positive_class``);
    forecasting sequences get the next step x[:, T] as targets.

    Args:
        spec: Generator configuration
        count: Number of sequences
        seed: Seed; the output is a pure function of (spec, count, seed)

    Returns:
        Sequences and the ground-truth mask (adjacency rows for forecasting,
        all-parents for classification with D = n_classes)

    Raises:
        NumericDivergenceError: If |x| exceeds 1e6
    """
    count = validate_positive_integer(count, "count")
    rng = np.random.default_rng(seed)
    n_variables, length = spec.n_variables, spec.length

    if spec.adjacency is not None:
        adjacency = np.asarray(spec.adjacency, dtype=np.int64)
    else:
        adjacency = draw_adjacency(n_variables, spec.edge_density, rng)
    weights = draw_weights(adjacency, rng)
    link = np.tanh if spec.link_function == "tanh" else (lambda v: v)

    # one extra step supplies the forecasting target
    total = spec.burn_in + length + 1
    series: list[TimeSeries] = []
    for index in range(count):
        x = np.zeros((n_variables, total))
        if spec.initial_state == "random":
            x[:, 0] = rng.standard_normal(n_variables)
        noise = spec.noise_std * rng.standard_normal((n_variables, total))
        for t in range(1, total):
            x[:, t] = link(weights @ x[:, t - 1]) + noise[:, t]
        if not np.all(np.isfinite(x)) or np.abs(x).max() > SCM_EXPLOSION_LIMIT:
            raise NumericDivergenceError(
                "SCM dynamics exploded (|x| > 1e6); use smaller weights or the tanh link"
            )
        observed = x[:, spec.burn_in :]
        values = observed[:, :length].copy()

        label = None
        targets = None
        if spec.task == "classification":
            label = int(rng.integers(spec.n_classes))
            if spec.motif is not None and label == spec.motif.positive_class:
                _plant_motif(values, spec.motif, rng)
        else:
            targets = observed[:, length]

        series.append(
            TimeSeries(
                values=values,
                sampling_rate_hz=spec.sampling_rate_hz,
                label=label,
                targets=targets,
                id=f"seq{index:05d}",
            )
        )

    if spec.task == "forecasting":
        mask = CausalMask(adjacency, MaskSource.GROUND_TRUTH_SCM)
    else:
        mask = CausalMask.full(spec.n_classes, n_variables, MaskSource.GROUND_TRUTH_SCM)

    logger.info(
        f"Generated {count} {spec.task} sequences (N={n_variables}, T={length}, "
        f"edges={int(adjacency.sum())}, seed={seed})"
    )
    return series, mask


def _plant_motif(values: np.ndarray, motif: MotifSpec, rng: np.random.Generator) -> None:
    shift = int(rng.integers(-motif.jitter, motif.jitter + 1)) if motif.jitter else 0
    start, end = motif.window_start + shift, motif.window_end + shift
    steps = np.arange(end - start)
    burst = motif.amplitude * np.sin(2.0 * np.pi * motif.frequency * steps + np.pi / 4)
    variables = motif.variables if motif.variables else list(range(values.shape[0]))
    for v in variables:
        values[v, start:end] += burst


def perturb_mask(mask: CausalMask, flips: int, seed: int) -> CausalMask:
    """Toggle exactly ``flips`` entries without emptying any row.

    Raises:
        ConfigurationError: If flips is negative, exceeds D·N, or cannot be
            placed without leaving an output parentless
    """
    entries = mask.entries
    n_outputs, n_variables = entries.shape
    if flips < 0 or flips > entries.size:
        raise ConfigurationError(f"flips must be in [0, {entries.size}], got {flips}")
    if flips == 0:
        return CausalMask(entries, MaskSource.PERTURBED)

    # a full row can lose at most N-1 entries; any other row can flip entirely
    full_rows = int(np.sum(entries.sum(axis=1) == n_variables))
    if flips > entries.size - full_rows:
        raise ConfigurationError(
            f"cannot toggle {flips} entries without emptying a row "
            f"(at most {entries.size - full_rows} for this mask)"
        )

    rng = np.random.default_rng(seed)
    chosen = np.zeros(entries.size, dtype=bool)
    chosen[rng.choice(entries.size, size=flips, replace=False)] = True
    chosen = chosen.reshape(n_outputs, n_variables)
    parents = entries == 1

    def empties(row: int) -> bool:
        # a row loses every parent exactly when its flips are its parents
        return bool(np.array_equal(chosen[row], parents[row]))

    for row in range(n_outputs):
        if not empties(row):
            continue
        chosen[row, rng.choice(np.flatnonzero(chosen[row]))] = False
        zeros = np.flatnonzero(~parents[row])
        if zeros.size:
            chosen[row, rng.choice(zeros)] = True
            continue
        # full row: the flip moves to a cell of another row that stays non-empty
        candidates = []
        for r, c in np.argwhere(~chosen):
            if r == row:
                continue
            chosen[r, c] = True
            if not empties(r):
                candidates.append((r, c))
            chosen[r, c] = False
        r, c = candidates[rng.integers(len(candidates))]
        chosen[r, c] = True

    toggled = np.where(chosen, 1 - entries, entries)
    return CausalMask(toggled, MaskSource.PERTURBED)


def random_mask(n_outputs: int, n_variables: int, density: float, seed: int) -> CausalMask:
    """Bernoulli(density) mask whose empty rows are re-drawn until nonempty."""
    if not 0.0 < density <= 1.0:
        raise ConfigurationError(f"density must be in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    entries = (rng.random((n_outputs, n_variables)) < density).astype(np.int64)
    for row in range(n_outputs):
        attempts = 0
        while entries[row].sum() == 0:
            entries[row] = (rng.random(n_variables) < density).astype(np.int64)
            attempts += 1
            if attempts >= MAX_RESAMPLE_ATTEMPTS:
                # density so small that redraws stall: fall back to one random parent
                entries[row, rng.integers(n_variables)] = 1
    return CausalMask(entries, MaskSource.RANDOM)