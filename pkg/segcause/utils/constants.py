"""Package-wide constants."""

# Numeric guards
INSTANCE_NORM_EPS: float = 1e-5
LOG_EPS: float = 1e-12
DIVERGENCE_LIMIT: float = 1e6
ATTENTION_ROW_TOLERANCE: float = 1e-6
ATTRIBUTION_SUM_TOLERANCE: float = 1e-9

# Segmenter defaults
DEFAULT_POOL_KERNEL: int = 5
DEFAULT_CHANGEPOINT_QUANTILE: float = 0.90
DEFAULT_L_MAX: int = 8
DEFAULT_POS_ENCODING_SCALE: float = 0.1
POS_ENCODING_BASE: float = 10000.0

# Spectral defaults
DEFAULT_J_MAX: int = 4
DEFAULT_T_PRIME: int = 8
DEFAULT_TREND_DIM: int = 16
WAVELET_MODE: str = "periodization"
SUPPORTED_WAVELETS: tuple[str, ...] = ("haar", "db2")

# Encoder defaults
DEFAULT_INPUT_PROJ_DIM: int = 16
DEFAULT_TCN_CHANNELS: int = 16
DEFAULT_TCN_KERNEL: int = 3
DEFAULT_TCN_DILATIONS: tuple[int, ...] = (1, 2, 4)
DEFAULT_D_Z: int = 32

# Objective defaults
DEFAULT_MARGIN: float = 1.0
DEFAULT_PROTOTYPE_DECAY: float = 0.9
DEFAULT_LEARNING_RATE: float = 1e-3
DEFAULT_MOMENTUM: float = 0.9
DEFAULT_WEIGHT_DECAY: float = 1e-4
# (fraction of epoch budget, alpha, beta, gamma)
DEFAULT_SCHEDULE_KNOTS: tuple[tuple[float, float, float, float], ...] = (
    (0.0, 1.0, 0.5, 0.05),
    (0.6, 1.0, 0.3, 0.2),
    (1.0, 1.0, 0.1, 0.5),
)

# SCM generator
SCM_WEIGHT_RANGE: tuple[float, float] = (0.3, 0.7)
SCM_SPECTRAL_RADIUS: float = 0.9
SCM_EXPLOSION_LIMIT: float = 1e6

# Causal mask sources selectable in configuration
MASK_SOURCES: tuple[str, ...] = ("ingested", "ground_truth_scm", "random")

# Separation loss variants; "separation" is the default
SEPARATION_MODES: tuple[str, ...] = ("separation", "eq12_literal", "eq10_triplet")

# Evaluation
DEFAULT_K_PERCENT: float = 15.0
DEFAULT_IG_STEPS: int = 32
DEFAULT_LIPSCHITZ_SIGMAS: tuple[float, ...] = (0.01, 0.02, 0.05)
DEFAULT_RUNTIME_T_VALUES: tuple[int, ...] = (128, 256, 512, 1024)
DEFAULT_RUNTIME_ITERATIONS: int = 20
DEFAULT_RUNTIME_WARMUP: int = 3

# Artifacts
CHECKPOINT_VERSION: int = 1
REFERENCE_CHECKPOINT_VERSION: int = 1
SIDECAR_SUFFIX: str = ".sidecar.json"
MANIFEST_NAME: str = "manifest.json"
CONFIG_SNAPSHOT_NAME: str = "config_snapshot.env"


class ExitCode:
    """Process exit codes for CLI commands."""

    OK = 0
    UNEXPECTED = 1
    CONFIG = 2
    DATA = 3
    DIVERGENCE = 4
