"""Environment configuration.

The MFAMP_THREADS environment variable caps the number of worker threads
used by parameter sweeps. If not set, defaults to min(4, cpu count).
"""

import logging
import os

logger = logging.getLogger(__name__)

DEFAULT_MAX_WORKERS = 4


def get_config_value(key: str, default: str = "") -> str:
    """Get a config value from the environment.

    Priority: env var > default.
    """
    env_val = os.environ.get(key, "")
    if env_val:
        return env_val
    return default


def max_workers() -> int:
    """Return the worker-thread cap for sweeps."""
    fallback = min(DEFAULT_MAX_WORKERS, os.cpu_count() or 1)
    raw = get_config_value("MFAMP_THREADS")
    if not raw:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring MFAMP_THREADS={raw!r}: not an integer")
        return fallback
    if value < 1:
        logger.warning(f"Ignoring MFAMP_THREADS={raw!r}: must be >= 1")
        return fallback
    return value
