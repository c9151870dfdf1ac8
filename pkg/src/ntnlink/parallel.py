"""Deterministic worker-pool helper.

Work items are indexed 0..total-1 and carry their own RNG streams derived
from (seed, index). The chunk decomposition is fixed (it does not depend on
the thread count) and chunk results come back in index order, so even
floating-point reductions over chunk partials are bit-identical for any
number of workers.
"""

from __future__ import annotations

import multiprocessing as mp

CHUNK = 64


def chunk_bounds(total: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def run_chunked(worker, args: tuple, total: int, threads: int):
    """worker(args, lo, hi) -> chunk result; returns chunk results in index
    order. threads <= 1 runs every chunk inline."""
    if total <= 0:
        return []
    bounds = chunk_bounds(total)
    if threads <= 1:
        return [worker(args, lo, hi) for lo, hi in bounds]
    ctx = mp.get_context("fork")
    with ctx.Pool(processes=threads) as pool:
        return pool.starmap(worker, [(args, lo, hi) for lo, hi in bounds])
