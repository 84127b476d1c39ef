"""Chunked data-parallel helpers; all reductions stay order-deterministic."""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    env = os.environ.get("HQCHECK_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def chunk_ranges(n: int, size: int) -> list[tuple[int, int]]:
    size = max(1, size)
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def map_chunks(fn, items, threads: int):
    """Yield fn(item) in input order, at most ~2*threads evaluations in flight.

    With threads <= 1 this degenerates to a plain ordered map.
    """
    if threads <= 1:
        for it in items:
            yield fn(it)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending: deque = deque()
        items = iter(items)
        try:
            for _ in range(2 * threads):
                pending.append(pool.submit(fn, next(items)))
        except StopIteration:
            items = iter(())
        while pending:
            out = pending.popleft().result()
            try:
                pending.append(pool.submit(fn, next(items)))
            except StopIteration:
                pass
            yield out
