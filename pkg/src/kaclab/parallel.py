"""Deterministic thread-pool helpers.

Work is split into fixed-size blocks that do not depend on the worker
count, and block results are written into preallocated slots, so output
is bitwise identical for any thread count (there are no cross-block
reductions).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_num_threads = os.cpu_count() or 1


def set_num_threads(n: int):
    """Set the worker count used by :func:`map_blocks` (0 -> all cores)."""
    global _num_threads
    _num_threads = int(n) if n and n > 0 else (os.cpu_count() or 1)


def get_num_threads() -> int:
    return _num_threads


def map_blocks(fn, n_items: int, block: int = 64):
    """Apply ``fn(lo, hi)`` over fixed blocks of ``range(n_items)``.

    Returns the list of per-block results in block order.  The block
    layout is independent of the thread count.
    """
    bounds = [(lo, min(lo + block, n_items)) for lo in range(0, n_items, block)]
    results = [None] * len(bounds)
    if _num_threads <= 1 or len(bounds) <= 1:
        for i, (lo, hi) in enumerate(bounds):
            results[i] = fn(lo, hi)
        return results
    with ThreadPoolExecutor(max_workers=min(_num_threads, len(bounds))) as pool:
        futures = {pool.submit(fn, lo, hi): i for i, (lo, hi) in enumerate(bounds)}
        for fut, i in futures.items():
            results[i] = fut.result()
    return results
