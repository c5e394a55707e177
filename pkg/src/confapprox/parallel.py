"""Order-preserving map over a process pool."""
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> List:
    """``list(map(fn, items))``, fanned out over ``workers`` processes when ``workers > 1``.

    Results come back in input order, so callers merge deterministically
    regardless of worker count.
    """
    items = list(items)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
