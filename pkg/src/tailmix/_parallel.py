"""Order-preserving map over worker processes."""

import os
from concurrent.futures import ProcessPoolExecutor


def resolve_threads(threads) -> int:
    """``0``, ``None`` or ``"auto"`` mean one worker per CPU."""
    if threads in (None, 0, "auto"):
        return os.cpu_count() or 1
    return max(int(threads), 1)


def pmap(fn, items, threads=1) -> list:
    """``list(map(fn, items))``, fanned out when ``threads > 1``.

    Results come back in input order, so the output never depends on the
    worker count.
    """
    items = list(items)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
