"""Deterministic tile scheduling.

Work is split into independent tiles; partial results are reduced in a
fixed tile order regardless of how many workers ran them, so outputs are
bitwise identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "RELGRAPH_THREADS"
DEFAULT_TILE = 1024


def resolve_threads(threads: int | None) -> int:
    """Explicit argument wins, then the RELGRAPH_THREADS env var, then 1."""
    if threads is None:
        threads = int(os.environ.get(ENV_THREADS, "1") or "1")
    return max(1, threads)


def block_ranges(n: int, block: int = DEFAULT_TILE) -> list[range]:
    """Consecutive index ranges of at most `block` covering [0, n)."""
    return [range(lo, min(lo + block, n)) for lo in range(0, n, block)]


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int | None) -> Iterable[R]:
    """Apply `fn` to each item, yielding results in input order.

    With threads > 1 the items run on a thread pool; numpy releases the
    GIL inside BLAS so tiles genuinely overlap. Result order (and thus any
    reduction over it) is independent of the worker count.
    """
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return map(fn, items)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return iter(list(pool.map(fn, items)))
