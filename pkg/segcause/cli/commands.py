"""Subcommand implementations.

Every command resolves settings (config file < environment < ``--set``
overrides < dedicated flags), logs a banner, writes its artifacts under
``--out`` and finishes with ``manifest.json`` and ``config_snapshot.env``.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from segcause import __version__
from segcause.config.settings import Settings, reload_settings
from segcause.data.io import (
    load_dataset,
    load_mask,
    save_dataset,
    save_mask,
    save_report,
    write_document,
    write_json,
    write_table,
)
from segcause.data.schemas import ManifestDocument, ManifestEntry, SegmentSetDocument
from segcause.data.scm import generate_scm, random_mask
from segcause.data.types import CausalMask, DegradationEntry, MaskSource, TimeSeries
from segcause.evaluation.faithfulness import compare_high_low, mask_robustness, masking_curve
from segcause.evaluation.metrics import stability
from segcause.evaluation.probes import (
    LipschitzResult,
    lipschitz_probe,
    quadratic_runner_builder,
    runtime_scaling,
    scaling_ratios,
    segcause_runner_builder,
)
from segcause.evaluation.report import build_report, degradation_row, export_embeddings
from segcause.explainers.attention import extract_attributions
from segcause.explainers.registry import create_explainer
from segcause.model.batching import infer_task
from segcause.model.network import (
    Checkpoint,
    ModelConfig,
    SegCauseModel,
    init_model,
    load_checkpoint,
    save_checkpoint,
)
from segcause.model.reference import (
    ReferenceConfig,
    ReferenceModelParams,
    init_reference,
    train_reference,
)
from segcause.training.trainer import TrainingConfig, train
from segcause.utils.constants import CONFIG_SNAPSHOT_NAME, MANIFEST_NAME
from segcause.utils.exceptions import ConfigurationError, DimensionMismatchError
from segcause.utils.logging_config import get_logger, set_run_context, setup_logging
from segcause.utils.path_utils import ensure_output_dir, guard_overwrite

logger = get_logger(__name__)

BASELINE_METHODS = ("random", "grad_saliency", "integrated_gradients")


@dataclass
class RunContext:
    """Resolved settings and output bookkeeping for one command."""

    command: str
    settings: Settings
    out_dir: Path
    force: bool
    outputs: list[ManifestEntry] = field(default_factory=list)

    def path(self, name: str, kind: str) -> Path:
        """Output path for ``name``, registered in the manifest."""
        self.outputs.append(ManifestEntry(path=name, kind=kind))
        return self.out_dir / name

    def guard(self, names: list[str]) -> None:
        guard_overwrite([self.out_dir / n for n in names], self.force)

    def finish(self, seeds: list[int], details: Optional[dict[str, Any]] = None) -> None:
        """Write the config snapshot and the manifest."""
        self.settings.write_snapshot(self.path(CONFIG_SNAPSHOT_NAME, "config"))
        manifest = ManifestDocument(
            command=self.command,
            version=__version__,
            seeds=seeds,
            outputs=list(self.outputs),
            details=details,
        )
        write_document(manifest, self.path(MANIFEST_NAME, "manifest"))
        logger.info(f"Wrote {len(self.outputs)} artifacts to {self.out_dir}")


def parse_overrides(pairs: Optional[list[str]]) -> dict[str, str]:
    """Parse repeated ``--set KEY=VALUE`` flags.

    Raises:
        ConfigurationError: If an entry has no ``=`` or an empty key
    """
    overrides: dict[str, str] = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigurationError(f"Invalid override (expected KEY=VALUE): {pair}")
        key, value = pair.split("=", 1)
        key = key.strip().upper()
        if not key:
            raise ConfigurationError(f"Invalid override (empty key): {pair}")
        overrides[key] = value.strip()
    return overrides


def prepare(command: str, args: argparse.Namespace) -> RunContext:
    """Resolve settings, configure logging and create the output directory."""
    overrides = parse_overrides(getattr(args, "set", None))
    if getattr(args, "seed", None) is not None:
        overrides["RUN_SEED"] = str(args.seed)
    if getattr(args, "out", None):
        overrides["RUN_OUT_DIR"] = args.out
    if getattr(args, "jobs", None) is not None:
        overrides["RUN_JOBS"] = str(args.jobs)
    if getattr(args, "baselines", False):
        overrides["EVAL_BASELINES"] = "true"

    settings = reload_settings(getattr(args, "config", None), overrides)
    setup_logging(
        level=settings.log_level,
        use_colors=settings.log_use_colors,
        json_format=settings.log_json_format,
        log_file=settings.log_file,
        force=True,
    )
    set_run_context(command, settings.run_seed)
    out_dir = ensure_output_dir(settings.run_out_dir)

    logger.info("=" * 60)
    logger.info(f"segcause {command} v{__version__}")
    logger.info("=" * 60)
    logger.info(f"Output directory: {out_dir}")
    logger.info(f"Seed: {settings.run_seed}")
    logger.info("=" * 60)
    return RunContext(command, settings, out_dir, bool(getattr(args, "force", False)))


def load_train_data(settings: Settings) -> list[TimeSeries]:
    if not settings.dataset_path:
        raise ConfigurationError("DATASET_PATH is required (set it in the config or via --set)")
    return load_dataset(
        settings.dataset_path, settings.dataset_format, settings.dataset_sampling_rate_hz
    )


def load_eval_data(settings: Settings) -> list[TimeSeries]:
    """Held-out data, falling back to the training file."""
    path = settings.dataset_test_path or settings.dataset_path
    if not path:
        raise ConfigurationError("DATASET_TEST_PATH or DATASET_PATH is required")
    return load_dataset(path, settings.dataset_format, settings.dataset_sampling_rate_hz)


def default_mask_path(settings: Settings) -> Optional[Path]:
    """mask.json next to the dataset, as written by ``gen-data``."""
    if settings.mask_path:
        return Path(settings.mask_path)
    if settings.dataset_path:
        return Path(settings.dataset_path).with_name("mask.json")
    return None


def resolve_mask(settings: Settings, n_outputs: int, n_variables: int, seed: int) -> CausalMask:
    """Mask for the configured source, checked against D×N.

    Raises:
        ConfigurationError: If an ingested mask has no path
        ArtifactIOError: If the mask file is missing
        DimensionMismatchError: If the mask shape does not match the data
    """
    source = MaskSource(settings.mask_source)
    if source == MaskSource.RANDOM:
        mask = random_mask(n_outputs, n_variables, settings.mask_random_density, seed)
    else:
        path = Path(settings.mask_path) if settings.mask_path else None
        if source == MaskSource.GROUND_TRUTH_SCM:
            path = default_mask_path(settings)
        if path is None:
            raise ConfigurationError(f"MASK_PATH is required for MASK_SOURCE={source.value}")
        mask = load_mask(path, source)

    if (mask.n_outputs, mask.n_variables) != (n_outputs, n_variables):
        raise DimensionMismatchError(
            f"mask is {mask.n_outputs}x{mask.n_variables} but the data need "
            f"{n_outputs}x{n_variables}",
            "D" if mask.n_outputs != n_outputs else "N",
        )
    logger.info(f"Causal mask: {source.value} ({int(mask.entries.sum())} parent links)")
    return mask


def check_checkpoint(model: SegCauseModel, data: list[TimeSeries]) -> None:
    """Raise ConfigurationError when a checkpoint does not fit the data."""
    task, n_outputs = infer_task(data)
    if task != model.config.task:
        raise ConfigurationError(f"checkpoint head is {model.config.task}, data is {task}")
    model.check_compatible(data[0].n_variables)
    if task == "regression":
        model.check_compatible(data[0].n_variables, n_outputs)
    elif n_outputs > model.n_outputs:
        raise ConfigurationError(
            f"dimension mismatch: checkpoint has D={model.n_outputs}, data need D={n_outputs}"
        )


def load_checkpoints(args: argparse.Namespace, data: list[TimeSeries]) -> list[SegCauseModel]:
    paths = getattr(args, "checkpoint", None) or []
    if not paths:
        raise ConfigurationError("at least one --checkpoint is required")
    models = []
    for path in paths:
        model = load_checkpoint(path).model.eval()
        check_checkpoint(model, data)
        models.append(model)
    return models


def cmd_gen_data(args: argparse.Namespace) -> None:
    """Generate a synthetic SCM dataset with its ground-truth mask."""
    ctx = prepare("gen-data", args)
    settings = ctx.settings
    spec = settings.scm_spec
    names = ["train.csv", "train.sidecar.json", "test.csv", "test.sidecar.json", "mask.json"]
    ctx.guard(names)

    total = settings.scm_train_count + settings.scm_test_count
    series, mask = generate_scm(spec, total, settings.run_seed)
    train_split, test_split = series[: settings.scm_train_count], series[settings.scm_train_count :]

    save_dataset(train_split, ctx.path("train.csv", "dataset"))
    ctx.outputs.append(ManifestEntry(path="train.sidecar.json", kind="dataset"))
    save_dataset(test_split, ctx.path("test.csv", "dataset"))
    ctx.outputs.append(ManifestEntry(path="test.sidecar.json", kind="dataset"))
    save_mask(mask, ctx.path("mask.json", "mask"))

    logger.info(f"Train: {len(train_split)} sequences, test: {len(test_split)} sequences")
    ctx.finish(
        [settings.run_seed],
        {"task": spec.task, "n_variables": spec.n_variables, "length": spec.length},
    )


def cmd_train_reference(args: argparse.Namespace) -> None:
    """Fit the reference attention model."""
    ctx = prepare("train-reference", args)
    ctx.guard(["reference.pt", "reference_loss.csv"])
    data = load_train_data(ctx.settings)

    params = train_reference(data, ctx.settings.reference_training_config)
    params.save(ctx.path("reference.pt", "reference"))
    write_table(
        [{"epoch": i, "loss": loss} for i, loss in enumerate(params.loss_history)],
        ctx.path("reference_loss.csv", "table"),
    )
    final = params.loss_history[-1] if params.loss_history else float("nan")
    ctx.finish([ctx.settings.run_seed], {"final_loss": final})


def obtain_reference(
    args: argparse.Namespace, settings: Settings, data: list[TimeSeries]
) -> ReferenceModelParams:
    """Load ``--reference`` or train one inline."""
    if getattr(args, "reference", None):
        params = ReferenceModelParams.load(args.reference)
        if params.config.n_variables != data[0].n_variables:
            raise ConfigurationError(
                f"dimension mismatch: reference has N={params.config.n_variables}, "
                f"data have N={data[0].n_variables}"
            )
        return params
    logger.info("No --reference given; training the reference model first")
    return train_reference(data, settings.reference_training_config)


def cmd_train(args: argparse.Namespace) -> None:
    """Train the segment model under the staged objective."""
    ctx = prepare("train", args)
    settings = ctx.settings
    data = load_train_data(settings)
    task, n_outputs = infer_task(data)
    cfg: TrainingConfig = settings.training_config()

    resume: Optional[Checkpoint] = None
    if getattr(args, "resume", None):
        resume = load_checkpoint(args.resume)
        check_checkpoint(resume.model, data)
        model = resume.model
        logger.info(f"Resuming from {args.resume} at epoch {resume.epoch}")
    else:
        ctx.guard(["checkpoint.pt", "loss_trace.csv"])
        n_variables = data[0].n_variables
        mask = resolve_mask(settings, n_outputs, n_variables, settings.run_seed)
        model_config: ModelConfig = settings.model_config_for(n_variables, task)
        reference = obtain_reference(args, settings, data)
        model = init_model(model_config, mask, reference, settings.run_seed)

    checkpoint_path = ctx.path("checkpoint.pt", "checkpoint")
    result = train(model, data, cfg, resume=resume, checkpoint_path=checkpoint_path)
    save_checkpoint(checkpoint_path, result.checkpoint())
    write_table([r.as_dict() for r in result.trace], ctx.path("loss_trace.csv", "table"))

    last = result.trace[-1].as_dict() if result.trace else {}
    ctx.finish([cfg.seed], {"epochs": result.epochs_completed, "final": last})


def cmd_explain(args: argparse.Namespace) -> None:
    """Write attribution maps, segment dumps and latent embeddings."""
    ctx = prepare("explain", args)
    ctx.guard(["attributions.csv", "segments.json", "embeddings.csv"])
    data = load_eval_data(ctx.settings)
    model = load_checkpoints(args, data)[0]

    attributions = extract_attributions(model, data)
    rows = [
        {"sequence_id": s.id, "variable_index": n, **{f"t{t}": v for t, v in enumerate(row)}}
        for s, attribution in zip(data, attributions)
        for n, row in enumerate(attribution)
    ]
    write_table(rows, ctx.path("attributions.csv", "attribution"))

    segments = {
        s.id: SegmentSetDocument.from_domain(segment_set, include_tensor=False).model_dump()
        for s, segment_set in zip(data, model.segment_sets(data))
    }
    write_json(segments, ctx.path("segments.json", "segments"))

    count = export_embeddings(model, data, ctx.path("embeddings.csv", "embeddings"))
    ctx.finish([ctx.settings.run_seed], {"sequences": len(data), "embeddings": count})


@dataclass
class SeedEvaluation:
    """Per-checkpoint evaluation outputs."""

    seed: int
    rows: list[dict]
    top: dict[str, DegradationEntry]
    attributions: np.ndarray


def evaluate_seed(
    model: SegCauseModel, data: list[TimeSeries], settings: Settings, seed: int
) -> SeedEvaluation:
    """Faithfulness rows of one trained model: own explanation plus baselines."""
    attributions = extract_attributions(model, data)
    rows = []
    top: dict[str, DegradationEntry] = {}
    for target in ("top", "bottom", "random"):
        protocol = settings.masking_protocol(target, seed)
        row, entries = degradation_row("segment_attention", model, data, attributions, protocol)
        rows.append({"seed": seed, **row})
        if target == "top":
            top = entries

    if settings.eval_baselines:
        for method in BASELINE_METHODS:
            kwargs = {"steps": settings.eval_ig_steps} if method == "integrated_gradients" else {}
            explainer = create_explainer(method, seed=seed, **kwargs)
            maps = np.stack([explainer.explain(model, s).values for s in data])
            protocol = settings.masking_protocol("top", seed)
            row, _ = degradation_row(method, model, data, maps, protocol)
            rows.append({"seed": seed, **row})

    logger.info(f"Seed {seed}: evaluated {len(rows)} faithfulness rows")
    return SeedEvaluation(seed, rows, top, attributions)


def runtime_table(model: SegCauseModel, settings: Settings) -> tuple[list[dict], dict[int, float]]:
    """Linear-time model vs the quadratic attention contrast over EVAL_RUNTIME_T_VALUES."""
    config = model.config.model_copy(
        update={"segmenter": model.config.segmenter.model_copy(update={"t_max": None})}
    )
    kwargs = {
        "t_values": settings.runtime_t_values,
        "batch": settings.eval_runtime_batch,
        "iterations": settings.eval_runtime_iterations,
        "warmup": settings.eval_runtime_warmup,
    }
    batch, seed = settings.eval_runtime_batch, settings.run_seed
    ours = runtime_scaling(
        segcause_runner_builder(config, model.n_outputs, batch, seed), **kwargs
    )
    quadratic = runtime_scaling(
        quadratic_runner_builder(config.n_variables, model.n_outputs, batch, seed), **kwargs
    )
    ours_ratio, quadratic_ratio = scaling_ratios(ours), scaling_ratios(quadratic)
    rows = [
        {
            "T": length,
            "segcause_ms": ours[length],
            "segcause_ratio": ours_ratio[length],
            "quadratic_ms": quadratic[length],
            "quadratic_ratio": quadratic_ratio[length],
        }
        for length in sorted(ours)
    ]
    return rows, ours


def lipschitz_rows(results: list[LipschitzResult]) -> list[dict]:
    return [r.as_row() for r in results]


def cmd_evaluate(args: argparse.Namespace) -> None:
    """Faithfulness, stability, Lipschitz and runtime evaluation.

    Each ``--checkpoint`` is one trained seed; stability needs at least two.
    """
    ctx = prepare("evaluate", args)
    settings = ctx.settings
    names = ["faithfulness.csv", "faithfulness_summary.csv", "masking_curve.csv", "report.json"]
    names += ["lipschitz.csv", "runtime.csv"]
    ctx.guard(names)
    data = load_eval_data(settings)
    models = load_checkpoints(args, data)
    if len(models) > len(settings.seeds):
        raise ConfigurationError(
            f"{len(models)} checkpoints but EVAL_SEEDS lists only {len(settings.seeds)} seeds"
        )
    seeds = settings.seeds[: len(models)]

    with ThreadPoolExecutor(max_workers=settings.run_jobs) as pool:
        futures = [
            pool.submit(evaluate_seed, model, data, settings, seed)
            for model, seed in zip(models, seeds)
        ]
        evaluations = [f.result() for f in futures]

    rows = [row for evaluation in evaluations for row in evaluation.rows]
    write_table(rows, ctx.path("faithfulness.csv", "table"))
    frame = pd.DataFrame(rows)
    summary = (
        frame.drop(columns=["seed"]).groupby(["method", "target"], sort=False).mean().reset_index()
    )
    write_table(summary.to_dict("records"), ctx.path("faithfulness_summary.csv", "table"))

    primary = "auroc" if models[0].config.task == "classification" else "mse"
    deltas = [abs(e.top[primary].delta_percent) for e in evaluations if primary in e.top]
    stability_value = None
    if len(deltas) >= 2:
        result = stability(deltas)
        stability_value = result.coefficient if result.defined else None
        logger.info(f"Stability coefficient over {len(deltas)} seeds: {result.coefficient:.4f}")
    else:
        logger.warning("Stability needs at least two checkpoints; skipped")

    first, first_eval = models[0], evaluations[0]
    curve = masking_curve(
        first,
        data,
        settings.masking_ratios,
        settings.masking_protocol("top", seeds[0]),
        primary,
        first_eval.attributions,
    )
    write_table(curve, ctx.path("masking_curve.csv", "table"))
    high_low = compare_high_low(
        first, data, settings.masking_protocol("top", seeds[0]), primary, first_eval.attributions
    )

    details: dict[str, Any] = {
        "primary_metric": primary,
        "high_vs_low": {k: v.delta_percent for k, v in high_low.items()},
    }
    if primary == "mse":
        robustness, rho = mask_robustness(first, data, settings.mask_flips, seeds[0])
        write_table(robustness, ctx.path("mask_robustness.csv", "table"))
        details["mask_robustness_spearman"] = rho

    lipschitz = lipschitz_probe(
        first, data, settings.lipschitz_sigmas, settings.eval_lipschitz_trials, seeds[0]
    )
    write_table(lipschitz_rows(lipschitz), ctx.path("lipschitz.csv", "table"))

    runtime_rows, runtime = runtime_table(first, settings)
    write_table(runtime_rows, ctx.path("runtime.csv", "table"))

    report = build_report(
        first_eval.attributions,
        first_eval.top,
        stability_value,
        [r.sample for r in lipschitz],
        runtime,
    )
    save_report(report, ctx.path("report.json", "report"))
    details["stability"] = stability_value
    ctx.finish(seeds, details)


def cmd_probe_lipschitz(args: argparse.Namespace) -> None:
    """Empirical Lipschitz probe of the model's explanations."""
    ctx = prepare("probe-lipschitz", args)
    ctx.guard(["lipschitz.csv"])
    settings = ctx.settings
    data = load_eval_data(settings)
    model = load_checkpoints(args, data)[0]
    results = lipschitz_probe(
        model, data, settings.lipschitz_sigmas, settings.eval_lipschitz_trials, settings.run_seed
    )
    write_table(lipschitz_rows(results), ctx.path("lipschitz.csv", "table"))
    ctx.finish([settings.run_seed], {"ratios": [r.sample.ratio for r in results]})


def cmd_profile(args: argparse.Namespace) -> None:
    """Runtime scaling against the quadratic attention contrast."""
    ctx = prepare("profile", args)
    ctx.guard(["runtime.csv"])
    settings = ctx.settings
    if getattr(args, "checkpoint", None):
        model = load_checkpoint(args.checkpoint[0]).model.eval()
    else:
        task = "classification" if settings.scm_task == "classification" else "regression"
        n_outputs = settings.scm_n_classes if task == "classification" else settings.scm_n_variables
        config = settings.model_config_for(settings.scm_n_variables, task)
        mask = CausalMask.full(n_outputs, settings.scm_n_variables)
        reference = init_reference(
            ReferenceConfig(n_variables=settings.scm_n_variables, n_outputs=n_outputs, task=task),
            settings.run_seed,
        )
        model = init_model(config, mask, reference, settings.run_seed)

    rows, _ = runtime_table(model, settings)
    write_table(rows, ctx.path("runtime.csv", "table"))
    ctx.finish([settings.run_seed], {"ratios": {r["T"]: r["segcause_ratio"] for r in rows}})


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train-reference": cmd_train_reference,
    "train": cmd_train,
    "explain": cmd_explain,
    "evaluate": cmd_evaluate,
    "probe-lipschitz": cmd_probe_lipschitz,
    "profile": cmd_profile,
}
