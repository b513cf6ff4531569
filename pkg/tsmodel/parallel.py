"""
Worker pool for independent pure computations.
Results are returned in input order, so output never depends on scheduling.
"""
import os
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HJORTIC_THREADS"

_configured_threads: Optional[int] = None


def set_thread_count(threads: Optional[int]):
    """Set the default worker count (None restores the environment/default)."""
    global _configured_threads
    if threads is not None and threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    _configured_threads = threads


def thread_count() -> int:
    """
    Number of workers to use.

    A value set through set_thread_count (config file, env, then --threads
    already resolved) wins; otherwise HJORTIC_THREADS, default 1.
    """
    if _configured_threads is not None:
        return _configured_threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
            if value >= 1:
                return value
            logging.warning(f"Ignoring non-positive {THREADS_ENV}={env}")
        except ValueError:
            logging.warning(f"Ignoring unparseable {THREADS_ENV}={env}")
    return 1


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply fn to every item, possibly concurrently.

    Args:
        fn: Pure function of one item
        items: Work items
        threads: Worker count override

    Returns:
        List of results in input order
    """
    items = list(items)
    workers = threads or thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
