"""Deterministic replicate-level parallelism.

Work items carry pre-split RNG streams, results are reduced in submission
order, and BLAS pools are pinned to one thread for the duration of a run, so
outputs are byte-identical at any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from threadpoolctl import threadpool_limits


def deterministic_map(fn, items, threads: int = 1) -> list:
    items = list(items)
    with threadpool_limits(limits=1, user_api="blas"):
        if threads <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
