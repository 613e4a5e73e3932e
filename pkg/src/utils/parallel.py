"""
Ordered parallel map over independent work items.
"""
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from loguru import logger

T = TypeVar("T")
R = TypeVar("R")


def chunk_slices(n_items: int, chunk_size: int) -> List[slice]:
    """Contiguous slices of at most chunk_size items; depends only on n_items and chunk_size."""
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    return [slice(start, min(start + chunk_size, n_items)) for start in range(0, n_items, chunk_size)]


def parallel_map(fn: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply fn to every task and return results in task order.

    workers <= 1 (or a single task) runs in-process; otherwise a process
    pool is used, so fn and the tasks must be picklable.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]

    n_workers = min(workers, len(tasks))
    logger.info(f"Dispatching {len(tasks)} chunk(s) to {n_workers} worker process(es)")
    with ProcessPoolExecutor(max_workers=n_workers) as executor:
        return list(executor.map(fn, tasks))
