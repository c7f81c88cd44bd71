"""Command line module for the random derivative zeros toolkit.

This module contains the argument router, the subcommands and the shared logger.
"""

from app.cli.logger import get_logger

# Set up package-level logger
logger = get_logger("app.cli")
logger.debug("CLI module initialized")
