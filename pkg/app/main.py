import sys
from collections.abc import Sequence

from pydantic import ValidationError

from app.cli.cli_router import build_parser
from app.cli.logger import get_logger, set_package_level
from app.core.config import get_settings
from app.core.exceptions import EXIT_USAGE, ToolkitError

logger = get_logger(__name__)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the `rdz` command. Returns 0, 1 (usage) or 2 (failed trial)."""
    args = build_parser().parse_args(argv)

    try:
        set_package_level(args.log_level or get_settings().experiments.log_level)
        exit_code: int = args.handler(args)
    except ToolkitError as e:
        logger.error(e.detail)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Invalid parameters: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected failure: {e}", exc_info=True)
        return EXIT_USAGE
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
