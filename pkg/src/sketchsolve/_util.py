"""Shared worker-pool helpers for embarrassingly parallel trials."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "SKETCHSOLVE_THREADS"


def worker_count() -> int:
    """Worker cap: SKETCHSOLVE_THREADS if set, else the machine parallelism."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Map ``fn`` over ``items`` preserving order; threads release the GIL in BLAS."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
