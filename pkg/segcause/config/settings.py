"""Pydantic settings with environment variable and config file support."""

from pathlib import Path
from typing import Any, Optional

from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from segcause.config.validators import (
    parse_adjacency,
    parse_float_list,
    parse_int_list,
    parse_schedule_knots,
    validate_choice,
    validate_closed_unit_interval,
    validate_log_level,
    validate_non_negative_integer,
    validate_percent,
    validate_positive_integer,
)
from segcause.data.scm import MotifSpec, ScmSpec
from segcause.evaluation.faithfulness import MaskingProtocol
from segcause.model.decoder import DecoderConfig
from segcause.model.encoder import TcnConfig
from segcause.model.network import ModelConfig
from segcause.model.reference import ReferenceTrainingConfig
from segcause.model.segmenter import SegmenterConfig, max_segments
from segcause.model.spectral import SpectralConfig
from segcause.training.objectives import LossWeights
from segcause.training.trainer import TrainingConfig
from segcause.utils.constants import (
    DEFAULT_CHANGEPOINT_QUANTILE,
    DEFAULT_D_Z,
    DEFAULT_IG_STEPS,
    DEFAULT_INPUT_PROJ_DIM,
    DEFAULT_J_MAX,
    DEFAULT_K_PERCENT,
    DEFAULT_L_MAX,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MARGIN,
    DEFAULT_MOMENTUM,
    DEFAULT_POOL_KERNEL,
    DEFAULT_POS_ENCODING_SCALE,
    DEFAULT_PROTOTYPE_DECAY,
    DEFAULT_RUNTIME_ITERATIONS,
    DEFAULT_RUNTIME_WARMUP,
    DEFAULT_T_PRIME,
    DEFAULT_TCN_CHANNELS,
    DEFAULT_TCN_KERNEL,
    DEFAULT_TREND_DIM,
    DEFAULT_WEIGHT_DECAY,
    MASK_SOURCES,
    SEPARATION_MODES,
    SUPPORTED_WAVELETS,
)
from segcause.utils.exceptions import ConfigurationError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)


class Settings(BaseSettings):
    """Run settings."""

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    # Dataset settings
    dataset_path: Optional[str] = Field(
        default=None, alias="DATASET_PATH", description="Training dataset file"
    )
    dataset_test_path: Optional[str] = Field(
        default=None,
        alias="DATASET_TEST_PATH",
        description="Held-out dataset file used by explain/evaluate (defaults to DATASET_PATH)",
    )
    dataset_format: str = Field(default="csv", alias="DATASET_FORMAT")
    dataset_sampling_rate_hz: float = Field(
        default=1.0,
        alias="DATASET_SAMPLING_RATE_HZ",
        description="Sampling rate used when the dataset does not state one",
    )

    # Synthetic SCM settings
    scm_n_variables: int = Field(default=3, alias="SCM_N_VARIABLES")
    scm_length: int = Field(default=128, alias="SCM_LENGTH")
    scm_adjacency: Optional[str] = Field(
        default=None,
        alias="SCM_ADJACENCY",
        description="Lag-1 adjacency written row-wise, e.g. '1,0,0;1,1,0;0,1,1'",
    )
    scm_edge_density: float = Field(default=0.3, alias="SCM_EDGE_DENSITY")
    scm_noise_std: float = Field(default=0.1, alias="SCM_NOISE_STD")
    scm_link_function: str = Field(default="linear", alias="SCM_LINK_FUNCTION")
    scm_task: str = Field(default="classification", alias="SCM_TASK")
    scm_n_classes: int = Field(default=2, alias="SCM_N_CLASSES")
    scm_sampling_rate_hz: float = Field(default=1.0, alias="SCM_SAMPLING_RATE_HZ")
    scm_initial_state: str = Field(default="random", alias="SCM_INITIAL_STATE")
    scm_burn_in: int = Field(default=20, alias="SCM_BURN_IN")
    scm_train_count: int = Field(default=500, alias="SCM_TRAIN_COUNT")
    scm_test_count: int = Field(default=200, alias="SCM_TEST_COUNT")
    scm_motif_enabled: bool = Field(default=True, alias="SCM_MOTIF_ENABLED")
    scm_motif_window_start: int = Field(default=40, alias="SCM_MOTIF_WINDOW_START")
    scm_motif_window_end: int = Field(default=60, alias="SCM_MOTIF_WINDOW_END")
    scm_motif_amplitude: float = Field(default=3.0, alias="SCM_MOTIF_AMPLITUDE")
    scm_motif_frequency: float = Field(default=0.25, alias="SCM_MOTIF_FREQUENCY")
    scm_motif_variables: Optional[str] = Field(
        default=None,
        alias="SCM_MOTIF_VARIABLES",
        description="Comma-separated variables carrying the burst (all when empty)",
    )
    scm_motif_jitter: int = Field(default=0, alias="SCM_MOTIF_JITTER")

    # Reference attention model settings
    reference_epochs: int = Field(default=30, alias="REFERENCE_EPOCHS")
    reference_learning_rate: float = Field(default=1e-2, alias="REFERENCE_LEARNING_RATE")
    reference_batch_size: int = Field(default=32, alias="REFERENCE_BATCH_SIZE")
    reference_lstm_hidden: int = Field(default=16, alias="REFERENCE_LSTM_HIDDEN")
    reference_projection_dim: int = Field(default=16, alias="REFERENCE_PROJECTION_DIM")

    # Segmenter settings
    segmenter_pool_kernel: int = Field(default=DEFAULT_POOL_KERNEL, alias="SEGMENTER_POOL_KERNEL")
    segmenter_changepoint_quantile: float = Field(
        default=DEFAULT_CHANGEPOINT_QUANTILE, alias="SEGMENTER_CHANGEPOINT_QUANTILE"
    )
    segmenter_l_max: int = Field(default=DEFAULT_L_MAX, alias="SEGMENTER_L_MAX")
    segmenter_t_max: Optional[int] = Field(
        default=None,
        alias="SEGMENTER_T_MAX",
        description="Padded segment length (defaults to the sequence length)",
    )
    segmenter_saliency_threshold: str = Field(
        default="mean",
        alias="SEGMENTER_SALIENCY_THRESHOLD",
        description="'mean' (1/T) or a value in (0, 1)",
    )
    segmenter_pos_encoding_scale: float = Field(
        default=DEFAULT_POS_ENCODING_SCALE, alias="SEGMENTER_POS_ENCODING_SCALE"
    )
    segmenter_use_pruning: bool = Field(default=True, alias="SEGMENTER_USE_PRUNING")

    # Spectral settings
    spectral_j_max: int = Field(default=DEFAULT_J_MAX, alias="SPECTRAL_J_MAX")
    spectral_t_prime: int = Field(default=DEFAULT_T_PRIME, alias="SPECTRAL_T_PRIME")
    spectral_wavelet: str = Field(default="haar", alias="SPECTRAL_WAVELET")
    spectral_trend_dim: int = Field(default=DEFAULT_TREND_DIM, alias="SPECTRAL_TREND_DIM")
    spectral_use_trend: bool = Field(default=True, alias="SPECTRAL_USE_TREND")
    spectral_use_spectrum: bool = Field(default=True, alias="SPECTRAL_USE_SPECTRUM")

    # Encoder settings
    encoder_input_proj_dim: int = Field(
        default=DEFAULT_INPUT_PROJ_DIM, alias="ENCODER_INPUT_PROJ_DIM"
    )
    encoder_channels: int = Field(default=DEFAULT_TCN_CHANNELS, alias="ENCODER_CHANNELS")
    encoder_kernel_size: int = Field(default=DEFAULT_TCN_KERNEL, alias="ENCODER_KERNEL_SIZE")
    encoder_dilations: str = Field(
        default="1,2,4",
        alias="ENCODER_DILATIONS",
        description="Comma-separated dilation per residual block",
    )
    encoder_d_z: int = Field(default=DEFAULT_D_Z, alias="ENCODER_D_Z")
    encoder_aggregation: str = Field(default="mean_over_time", alias="ENCODER_AGGREGATION")

    # Decoder settings
    decoder_lstm_hidden: int = Field(default=32, alias="DECODER_LSTM_HIDDEN")
    decoder_use_causal_mask: bool = Field(default=True, alias="DECODER_USE_CAUSAL_MASK")

    # Loss settings
    loss_alpha: float = Field(default=1.0, alias="LOSS_ALPHA")
    loss_beta: float = Field(default=0.5, alias="LOSS_BETA")
    loss_gamma: float = Field(default=0.05, alias="LOSS_GAMMA")
    loss_schedule: Optional[str] = Field(
        default="0:1.0:0.5:0.05,0.6:1.0:0.3:0.2,1:1.0:0.1:0.5",
        alias="LOSS_SCHEDULE",
        description="epoch:alpha:beta:gamma knots; empty disables the schedule",
    )
    loss_schedule_relative: bool = Field(
        default=True,
        alias="LOSS_SCHEDULE_RELATIVE",
        description="Knot epochs are fractions of TRAIN_EPOCHS",
    )
    loss_weight_decay: float = Field(default=DEFAULT_WEIGHT_DECAY, alias="LOSS_WEIGHT_DECAY")
    loss_margin: float = Field(default=DEFAULT_MARGIN, alias="LOSS_MARGIN")
    loss_separation_mode: str = Field(default="separation", alias="LOSS_SEPARATION_MODE")
    loss_prototype_decay: float = Field(
        default=DEFAULT_PROTOTYPE_DECAY, alias="LOSS_PROTOTYPE_DECAY"
    )
    loss_beta_gamma_off: bool = Field(default=False, alias="LOSS_BETA_GAMMA_OFF")

    # Training settings
    train_epochs: int = Field(default=50, alias="TRAIN_EPOCHS")
    train_batch_size: int = Field(default=32, alias="TRAIN_BATCH_SIZE")
    train_learning_rate: float = Field(
        default=DEFAULT_LEARNING_RATE, alias="TRAIN_LEARNING_RATE"
    )
    train_momentum: float = Field(default=DEFAULT_MOMENTUM, alias="TRAIN_MOMENTUM")
    train_optimizer: str = Field(default="sgd", alias="TRAIN_OPTIMIZER")
    train_checkpoint_every: int = Field(
        default=0,
        alias="TRAIN_CHECKPOINT_EVERY",
        description="Write a resumable checkpoint every n epochs (0 = final only)",
    )

    # Causal mask settings
    mask_source: str = Field(
        default="ground_truth_scm",
        alias="MASK_SOURCE",
        description="ingested, ground_truth_scm or random",
    )
    mask_path: Optional[str] = Field(
        default=None, alias="MASK_PATH", description="Mask JSON file for the ingested source"
    )
    mask_random_density: float = Field(default=0.5, alias="MASK_RANDOM_DENSITY")

    # Evaluation settings
    eval_k_percent: float = Field(default=DEFAULT_K_PERCENT, alias="EVAL_K_PERCENT")
    eval_granularity: str = Field(default="pointwise", alias="EVAL_GRANULARITY")
    eval_fill: str = Field(default="mean", alias="EVAL_FILL")
    eval_seeds: str = Field(
        default="0,1,2,3,4",
        alias="EVAL_SEEDS",
        description="Comma-separated seeds; one trained model per seed",
    )
    eval_baselines: bool = Field(
        default=False,
        alias="EVAL_BASELINES",
        description="Add random, gradient saliency and integrated gradient rows",
    )
    eval_ig_steps: int = Field(default=DEFAULT_IG_STEPS, alias="EVAL_IG_STEPS")
    eval_masking_ratios: str = Field(
        default="5,10,15,20,30", alias="EVAL_MASKING_RATIOS", description="Sweep in percent"
    )
    eval_lipschitz_sigmas: str = Field(default="0.01,0.02,0.05", alias="EVAL_LIPSCHITZ_SIGMAS")
    eval_lipschitz_trials: int = Field(default=3, alias="EVAL_LIPSCHITZ_TRIALS")
    eval_runtime_t_values: str = Field(default="128,256,512,1024", alias="EVAL_RUNTIME_T_VALUES")
    eval_runtime_batch: int = Field(default=8, alias="EVAL_RUNTIME_BATCH")
    eval_runtime_iterations: int = Field(
        default=DEFAULT_RUNTIME_ITERATIONS, alias="EVAL_RUNTIME_ITERATIONS"
    )
    eval_runtime_warmup: int = Field(default=DEFAULT_RUNTIME_WARMUP, alias="EVAL_RUNTIME_WARMUP")
    eval_mask_flips: str = Field(
        default="1,2,4,8",
        alias="EVAL_MASK_FLIPS",
        description="Flip counts of the mask robustness sweep (forecasting only)",
    )

    # Run settings
    run_seed: int = Field(default=0, alias="RUN_SEED")
    run_out_dir: str = Field(default="runs/latest", alias="RUN_OUT_DIR")
    run_jobs: int = Field(
        default=1, alias="RUN_JOBS", description="Worker threads for per-seed evaluation"
    )

    # Logging settings
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    log_use_colors: bool = Field(default=True, alias="LOG_USE_COLORS")
    log_json_format: bool = Field(default=False, alias="LOG_JSON_FORMAT")
    log_file: Optional[str] = Field(default=None, alias="LOG_FILE")

    @property
    def seeds(self) -> list[int]:
        """Evaluation seeds."""
        return parse_int_list(self.eval_seeds, "EVAL_SEEDS")

    @property
    def masking_ratios(self) -> list[float]:
        ratios = parse_float_list(self.eval_masking_ratios, "EVAL_MASKING_RATIOS")
        return [validate_percent(r, "EVAL_MASKING_RATIOS") for r in ratios]

    @property
    def lipschitz_sigmas(self) -> list[float]:
        return parse_float_list(self.eval_lipschitz_sigmas, "EVAL_LIPSCHITZ_SIGMAS")

    @property
    def runtime_t_values(self) -> list[int]:
        return parse_int_list(self.eval_runtime_t_values, "EVAL_RUNTIME_T_VALUES")

    @property
    def mask_flips(self) -> list[int]:
        return parse_int_list(self.eval_mask_flips, "EVAL_MASK_FLIPS")

    @property
    def scm_spec(self) -> ScmSpec:
        """Synthetic generator configuration."""
        motif = None
        if self.scm_motif_enabled:
            variables = (
                parse_int_list(self.scm_motif_variables, "SCM_MOTIF_VARIABLES")
                if self.scm_motif_variables
                else None
            )
            motif = MotifSpec(
                window_start=self.scm_motif_window_start,
                window_end=self.scm_motif_window_end,
                amplitude=self.scm_motif_amplitude,
                frequency=self.scm_motif_frequency,
                variables=variables,
                jitter=self.scm_motif_jitter,
            )
        return ScmSpec(
            n_variables=self.scm_n_variables,
            length=self.scm_length,
            adjacency=parse_adjacency(self.scm_adjacency, self.scm_n_variables),
            edge_density=self.scm_edge_density,
            noise_std=self.scm_noise_std,
            link_function=self.scm_link_function,
            task=self.scm_task,
            n_classes=self.scm_n_classes,
            motif=motif,
            sampling_rate_hz=self.scm_sampling_rate_hz,
            initial_state=self.scm_initial_state,
            burn_in=self.scm_burn_in,
        )

    @property
    def reference_training_config(self) -> ReferenceTrainingConfig:
        return ReferenceTrainingConfig(
            epochs=self.reference_epochs,
            learning_rate=self.reference_learning_rate,
            batch_size=self.reference_batch_size,
            seed=self.run_seed,
            lstm_hidden=self.reference_lstm_hidden,
            projection_dim=self.reference_projection_dim,
        )

    @property
    def segmenter_config(self) -> SegmenterConfig:
        return SegmenterConfig(
            pool_kernel=self.segmenter_pool_kernel,
            changepoint_quantile=self.segmenter_changepoint_quantile,
            l_max=self.segmenter_l_max,
            t_max=self.segmenter_t_max,
            saliency_threshold=self.segmenter_saliency_threshold,
            pos_encoding_scale=self.segmenter_pos_encoding_scale,
            use_pruning=self.segmenter_use_pruning,
        )

    @property
    def spectral_config(self) -> SpectralConfig:
        return SpectralConfig(
            j_max=self.spectral_j_max,
            t_prime=self.spectral_t_prime,
            wavelet_family=self.spectral_wavelet,
            fusion_dim=self.encoder_d_z,
            trend_dim=self.spectral_trend_dim,
            use_trend=self.spectral_use_trend,
            use_spectrum=self.spectral_use_spectrum,
        )

    @property
    def tcn_config(self) -> TcnConfig:
        return TcnConfig(
            input_proj_dim=self.encoder_input_proj_dim,
            channels=self.encoder_channels,
            kernel_size=self.encoder_kernel_size,
            dilations=tuple(parse_int_list(self.encoder_dilations, "ENCODER_DILATIONS")),
            d_z=self.encoder_d_z,
            aggregation=self.encoder_aggregation,
        )

    @property
    def decoder_config(self) -> DecoderConfig:
        return DecoderConfig(
            lstm_hidden=self.decoder_lstm_hidden,
            max_segments=max_segments(self.segmenter_l_max),
            use_causal_mask=self.decoder_use_causal_mask,
        )

    @property
    def loss_weights(self) -> LossWeights:
        schedule = parse_schedule_knots(self.loss_schedule) if self.loss_schedule else None
        return LossWeights(
            alpha=self.loss_alpha,
            beta=self.loss_beta,
            gamma=self.loss_gamma,
            schedule=schedule,
            schedule_relative=self.loss_schedule_relative,
            weight_decay=self.loss_weight_decay,
            margin=self.loss_margin,
            separation_mode=self.loss_separation_mode,
            prototype_decay=self.loss_prototype_decay,
            beta_gamma_off=self.loss_beta_gamma_off,
        )

    def training_config(self, seed: Optional[int] = None) -> TrainingConfig:
        """Trainer configuration; ``seed`` overrides RUN_SEED."""
        return TrainingConfig(
            epochs=self.train_epochs,
            batch_size=self.train_batch_size,
            learning_rate=self.train_learning_rate,
            momentum=self.train_momentum,
            optimizer=self.train_optimizer,
            seed=self.run_seed if seed is None else seed,
            checkpoint_every=self.train_checkpoint_every,
            losses=self.loss_weights,
        )

    def model_config_for(self, n_variables: int, task: str) -> ModelConfig:
        """Full model configuration for data with N variables."""
        return ModelConfig(
            n_variables=n_variables,
            task=task,
            segmenter=self.segmenter_config,
            spectral=self.spectral_config,
            encoder=self.tcn_config,
            decoder=self.decoder_config,
        )

    def masking_protocol(self, target: str = "top", seed: Optional[int] = None) -> MaskingProtocol:
        return MaskingProtocol(
            k_percent=self.eval_k_percent,
            target=target,
            granularity=self.eval_granularity,
            fill=self.eval_fill,
            seed=self.run_seed if seed is None else seed,
        )

    def snapshot(self) -> dict[str, Any]:
        """Every resolved setting keyed by its environment name."""
        values = self.model_dump(by_alias=True)
        return {alias: values[alias] for alias in sorted(values)}

    def write_snapshot(self, path: Path) -> None:
        """Write the resolved settings as a KEY=VALUE file that loads back unchanged."""
        lines = []
        for key, value in self.snapshot().items():
            if value is None:
                lines.append(f"{key}=")
            elif isinstance(value, bool):
                lines.append(f"{key}={'true' if value else 'false'}")
            else:
                lines.append(f"{key}={value}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @field_validator(
        "scm_n_variables",
        "scm_length",
        "scm_n_classes",
        "scm_train_count",
        "scm_test_count",
        "reference_epochs",
        "reference_batch_size",
        "reference_lstm_hidden",
        "reference_projection_dim",
        "spectral_j_max",
        "spectral_t_prime",
        "spectral_trend_dim",
        "encoder_input_proj_dim",
        "encoder_channels",
        "encoder_d_z",
        "decoder_lstm_hidden",
        "train_epochs",
        "train_batch_size",
        "eval_ig_steps",
        "eval_lipschitz_trials",
        "eval_runtime_batch",
        "run_jobs",
    )
    @classmethod
    def validate_positive(cls, v: int, info) -> int:
        """Validate counts and widths."""
        return validate_positive_integer(v, info.field_name.upper())

    @field_validator(
        "scm_burn_in",
        "scm_motif_jitter",
        "train_checkpoint_every",
        "eval_runtime_warmup",
        "run_seed",
    )
    @classmethod
    def validate_non_negative(cls, v: int, info) -> int:
        return validate_non_negative_integer(v, info.field_name.upper())

    @field_validator("segmenter_t_max", mode="before")
    @classmethod
    def validate_t_max(cls, v):
        """Empty means 'use the sequence length'."""
        if v is None or (isinstance(v, str) and not v.strip()):
            return None
        return validate_positive_integer(v, "SEGMENTER_T_MAX")

    @field_validator(
        "dataset_path",
        "dataset_test_path",
        "scm_adjacency",
        "scm_motif_variables",
        "loss_schedule",
        "mask_path",
        "log_file",
        mode="before",
    )
    @classmethod
    def validate_optional_text(cls, v):
        if isinstance(v, str) and not v.strip():
            return None
        return v

    @field_validator("scm_edge_density", "mask_random_density")
    @classmethod
    def validate_density(cls, v: float, info) -> float:
        return validate_closed_unit_interval(v, info.field_name.upper())

    @field_validator("eval_k_percent")
    @classmethod
    def validate_k_percent(cls, v: float) -> float:
        return validate_percent(v, "EVAL_K_PERCENT")

    @field_validator("dataset_format")
    @classmethod
    def validate_dataset_format(cls, v: str) -> str:
        return validate_choice(v, ("csv", "json"), "DATASET_FORMAT")

    @field_validator("spectral_wavelet")
    @classmethod
    def validate_wavelet(cls, v: str) -> str:
        return validate_choice(v, SUPPORTED_WAVELETS, "SPECTRAL_WAVELET")

    @field_validator("mask_source")
    @classmethod
    def validate_mask_source(cls, v: str) -> str:
        return validate_choice(v, MASK_SOURCES, "MASK_SOURCE")

    @field_validator("loss_separation_mode")
    @classmethod
    def validate_separation_mode(cls, v: str) -> str:
        return validate_choice(v, SEPARATION_MODES, "LOSS_SEPARATION_MODE")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        return validate_log_level(v)


# Global settings instance
_settings: Optional[Settings] = None


def _build(config_file: Optional[str], overrides: Optional[dict[str, Any]]) -> Settings:
    if config_file is not None and not Path(config_file).is_file():
        raise ConfigurationError(f"Config file not found: {config_file}")
    try:
        if config_file is None:
            return Settings(**(overrides or {}))
        return Settings(_env_file=config_file, **(overrides or {}))
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e


def get_settings(
    config_file: Optional[str] = None, overrides: Optional[dict[str, Any]] = None
) -> Settings:
    """Get or create settings instance.

    Precedence: overrides > environment > config file > defaults.

    Raises:
        ConfigurationError: If the file is missing or a value is invalid
    """
    global _settings
    if _settings is None:
        _settings = _build(config_file, overrides)
    return _settings


def reload_settings(
    config_file: Optional[str] = None, overrides: Optional[dict[str, Any]] = None
) -> Settings:
    """Rebuild settings from environment, file and overrides."""
    global _settings
    _settings = _build(config_file, overrides)
    logger.debug(f"Settings reloaded (config file: {config_file or 'none'})")
    return _settings
