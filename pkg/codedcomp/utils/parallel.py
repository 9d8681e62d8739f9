"""
codedcomp Parallel Map

Runs chunked Monte-Carlo work either inline or on a process pool. Results
come back in submission order so reductions are deterministic.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from loguru import logger

T = TypeVar("T")
R = TypeVar("R")


def map_chunks(func: Callable[[T], R], tasks: Iterable[T], workers: int = 1) -> List[R]:
    """Apply `func` to every task; `func` and tasks must be picklable when workers > 1."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    logger.debug(f"dispatching {len(tasks)} chunks to {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))
