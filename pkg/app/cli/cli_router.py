import argparse
import sys
from typing import NoReturn

from app.cli.commands import check_fit, compare, fixed_degree, limit, simulate
from app.cli.logger import get_logger
from app.core.exceptions import EXIT_USAGE

# Set up logger for this module
logger = get_logger(__name__)


class CliArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the toolkit's usage code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(
        prog="rdz",
        description="Zeros of high-order derivatives of random polynomials",
    )
    parser.add_argument("--log-level", dest="log_level", help="overrides EXPERIMENTS__LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliArgumentParser)

    logger.debug("Registering simulate command")
    simulate.register(subparsers)
    logger.debug("Registering limit command")
    limit.register(subparsers)
    logger.debug("Registering compare command")
    compare.register(subparsers)
    logger.debug("Registering check-fit command")
    check_fit.register(subparsers)
    logger.debug("Registering fixed-degree command")
    fixed_degree.register(subparsers)
    return parser
