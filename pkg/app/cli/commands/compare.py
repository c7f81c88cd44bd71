import argparse

from app.cli import cli_messages, deps
from app.cli.commands.simulate import execute
from app.cli.logger import get_logger
from app.core.exceptions import InvalidParameterError

# Set up logger for this module
logger = get_logger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:  # type: ignore[type-arg]
    parser = subparsers.add_parser("compare", help="simulate and compute KS distances against a limit target")
    deps.add_ensemble_options(parser)
    deps.add_plan_options(parser)
    deps.add_trial_options(parser)
    parser.add_argument(
        "--target",
        help="kac-unit-circle | kac-a:<a> | kac-rescaled | elliptic-rescaled | elliptic-sphere | transform:<profile>[@<a>]",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    if not args.target:
        logger.warning("compare called without --target")
        raise InvalidParameterError(cli_messages.TARGET_REQUIRED)
    logger.info(f"compare request for ensemble={args.ensemble} n={args.n} target={args.target}")
    return execute(args, "compare", args.target)
