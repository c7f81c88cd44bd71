from app.cli.logger import get_logger

# Set up logger for this module
logger = get_logger(__name__)

# CLI Error Messages
NN_RULE_REQUIRED = "Exactly one of --Nn, --ratio or --fixed-m may be given"
NOTHING_TO_WRITE = "Report has no successful trials, nothing to write"
FIXED_DEGREE_KIND = "fixed-degree supports only the kac and elliptic ensembles"
TARGET_REQUIRED = "compare and limit need --target"

# Log that this module was imported (will help identify where messages originate)
logger.debug("CLI messages module loaded")
