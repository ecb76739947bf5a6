"""Ordered thread-pool map honouring ``FSO_EGC_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "FSO_EGC_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(4, os.cpu_count() or 1))


def map_ordered(fn, items, min_items: int = 64) -> list:
    """``[fn(x) for x in items]``, possibly on worker threads.

    Output order always matches input order, so any reduction over the
    result is independent of the worker count.
    """
    items = list(items)
    workers = worker_count()
    if workers == 1 or len(items) < min_items:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
