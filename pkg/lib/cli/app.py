"""Command-line entry point."""

import logging
import sys
from typing import Optional, Sequence

from lib.cli.commands import execute
from lib.cli.options import parse_args
from lib.errors import MfampError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"

IO_EXIT_CODE = 5


def configure_logging(level: int = logging.INFO) -> None:
    # stdout carries data, logs go to stderr
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and return its exit code."""
    configure_logging()
    try:
        parsed = parse_args(argv)
        logging.getLogger().setLevel(parsed.log_level)
        return execute(parsed.config)
    except MfampError as err:
        logger.error(f"{type(err).__name__}: {err}")
        return err.exit_code
    except OSError as err:
        logger.error(f"I/O error: {err}")
        return IO_EXIT_CODE


if __name__ == "__main__":
    sys.exit(main())
