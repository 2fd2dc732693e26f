"""Command-line subcommands and error handling."""

from segcause.cli.commands import COMMANDS
from segcause.cli.errors import EXIT_CODES, cli_error_handler, handle_exception

__all__ = ["COMMANDS", "EXIT_CODES", "cli_error_handler", "handle_exception"]
