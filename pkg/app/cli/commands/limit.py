import argparse
import sys
from pathlib import Path

from app.cli import cli_messages
from app.cli.logger import get_logger
from app.core.exceptions import InvalidParameterError, ReportError
from app.schemas.requests import GridSpec
from app.utils.experiments import tabulate_limit
from app.utils.reports import CSV_FLOAT_FORMAT

# Set up logger for this module
logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:  # type: ignore[type-arg]
    parser = subparsers.add_parser("limit", help="tabulate a limit radial CDF on a grid of radii")
    parser.add_argument("--target", help="closed-form case or transform:<profile>[@<a>]")
    parser.add_argument("--grid", default="0.05:3:0.05", help="lo:hi:step radii grid")
    parser.add_argument("--out", type=Path, help="CSV file; printed to stdout when omitted")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    if not args.target:
        raise InvalidParameterError(cli_messages.TARGET_REQUIRED)
    grid = GridSpec.parse(args.grid)
    logger.info(f"limit request for target={args.target} grid={args.grid}")
    table = tabulate_limit(args.target, grid)

    if args.out is None:
        table.to_csv(sys.stdout, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return 0
    try:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise ReportError(f"Cannot write limit table: {e.strerror}", path=str(args.out)) from e
    logger.info(f"Wrote {len(table)} rows to {args.out}")
    return 0
