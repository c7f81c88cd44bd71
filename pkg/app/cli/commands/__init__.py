"""Commands package for the CLI.

This package contains one module per subcommand.
"""

from app.cli.logger import get_logger

# Set up package-level logger
logger = get_logger("app.cli.commands")
logger.debug("CLI commands module initialized")
