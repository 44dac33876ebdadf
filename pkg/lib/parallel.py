"""Thread-pool evaluation of independent sweep cells."""

import concurrent.futures
import logging
from typing import Callable, List, Sequence, TypeVar

from lib.config import max_workers

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_cells(func: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """Evaluate func on every item; results are returned in item order.

    The pool size is capped by MFAMP_THREADS. Exceptions raised by a cell
    propagate once all submitted cells have finished.
    """
    items = list(items)
    workers = min(max_workers(), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    logger.debug(f"Running {len(items)} cells on {workers} threads")
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, item) for item in items]
        return [future.result() for future in futures]
