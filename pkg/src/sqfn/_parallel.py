"""Worker-count setting shared by FFTs and scale loops.

Results never depend on the worker count: scale families are reduced in
fixed node order after all nodes are computed.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_workers: int | None = None


def set_max_workers(k: int | None) -> None:
    global _workers
    if k is not None and k < 1:
        raise ValueError("worker count must be >= 1")
    _workers = k


def max_workers() -> int:
    return _workers or os.cpu_count() or 1


def pmap(fn, items):
    """Ordered map; threaded when more than one worker is allowed."""
    items = list(items)
    k = min(max_workers(), len(items))
    if k <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))
