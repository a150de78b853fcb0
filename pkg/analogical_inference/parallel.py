"""Process-pool helpers for the exhaustive enumerations.

Work is described by an index range ``[0, total)`` that is cut into
contiguous chunks; each chunk is handed to a worker and the per-chunk
results come back in chunk order, so merging them is independent of the
schedule.
"""
import logging
import multiprocessing as mp
import os
from typing import Callable, List, Optional, Tuple, TypeVar

from tqdm import tqdm

from .errors import UsageError

logger = logging.getLogger(__name__)

WORKERS_ENV = "ANALOGY_WORKERS"

T = TypeVar("T")


def worker_count(workers: Optional[int] = None) -> int:
    """Resolves the number of worker processes.

    An explicit value wins; otherwise ``ANALOGY_WORKERS`` is read from the
    environment, defaulting to a single (in-process) worker.
    """
    if workers is None:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    if workers < 1:
        raise UsageError(f"worker count must be >= 1, got {workers}")
    return workers


def split_range(total: int, parts: int) -> List[Tuple[int, int]]:
    """Cuts ``[0, total)`` into at most ``parts`` contiguous, nearly equal ranges."""
    if total < 0 or parts < 1:
        raise UsageError(f"cannot split {total} items into {parts} parts")
    parts = min(parts, total) or 1
    step, extra = divmod(total, parts)
    ranges = []
    start = 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        ranges.append((start, stop))
        start = stop
    return ranges


def map_ranges(
    func: Callable[[Tuple[int, int]], T],
    total: int,
    workers: Optional[int] = None,
    chunks: Optional[int] = None,
    desc: Optional[str] = None,
    progress: bool = False,
) -> List[T]:
    """Applies ``func`` to consecutive sub-ranges of ``[0, total)``.

    Args:
        func: picklable callable taking a ``(start, stop)`` pair.
        total: size of the index range.
        workers: process count, see :func:`worker_count`.
        chunks: number of ranges; defaults to four per worker.
        desc: progress bar label.
        progress: show a tqdm progress bar.

    Returns:
        The per-range results, in range order.
    """
    workers = worker_count(workers)
    ranges = split_range(total, chunks or 4 * workers)
    logger.debug(f"{desc or 'map_ranges'}: {total} items in {len(ranges)} ranges on {workers} worker(s)")
    if workers == 1:
        return [func(r) for r in tqdm(ranges, desc=desc, disable=not progress)]
    with mp.Pool(processes=workers) as pool:
        return list(tqdm(pool.imap(func, ranges), total=len(ranges), desc=desc, disable=not progress))
