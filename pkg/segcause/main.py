"""Command-line entry point."""

import argparse
import sys
from typing import Optional

from segcause import __version__
from segcause.cli.commands import COMMANDS
from segcause.cli.errors import cli_error_handler
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="KEY=VALUE settings file")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="Override one setting (repeatable); wins over the config file and environment",
    )
    parser.add_argument("--out", help="Output directory (RUN_OUT_DIR)")
    parser.add_argument("--seed", type=int, help="Run seed (RUN_SEED)")
    parser.add_argument("--force", action="store_true", help="Overwrite existing outputs")


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per pipeline stage."""
    parser = argparse.ArgumentParser(
        prog="segcause",
        description="Attention-guided segmentation with causally masked decoding",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub_parsers = {
        "gen-data": sub.add_parser("gen-data", help="Generate a synthetic SCM dataset"),
        "train-reference": sub.add_parser(
            "train-reference", help="Fit the reference attention model"
        ),
        "train": sub.add_parser("train", help="Train the segment model"),
        "explain": sub.add_parser("explain", help="Write attributions, segments and embeddings"),
        "evaluate": sub.add_parser("evaluate", help="Faithfulness, stability, Lipschitz, runtime"),
        "probe-lipschitz": sub.add_parser(
            "probe-lipschitz", help="Empirical Lipschitz probe of explanations"
        ),
        "profile": sub.add_parser("profile", help="Runtime scaling over sequence lengths"),
    }
    for sub_parser in sub_parsers.values():
        _add_common(sub_parser)

    train = sub_parsers["train"]
    train.add_argument("--reference", help="Reference checkpoint (trained inline when omitted)")
    train.add_argument("--resume", help="Checkpoint to continue training from")

    for name in ("explain", "evaluate", "probe-lipschitz", "profile"):
        sub_parsers[name].add_argument(
            "--checkpoint",
            action="append",
            help="Trained checkpoint (repeat once per seed for evaluate)",
        )

    evaluate = sub_parsers["evaluate"]
    evaluate.add_argument(
        "--baselines",
        action="store_true",
        help="Add random, gradient saliency and integrated gradient rows",
    )
    evaluate.add_argument("--jobs", type=int, help="Checkpoints evaluated in parallel")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    command = cli_error_handler(args.command)(COMMANDS[args.command])
    return command(args)


if __name__ == "__main__":
    sys.exit(main())
