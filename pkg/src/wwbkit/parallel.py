"""Order-preserving process pool used by the sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional

ENV_WORKERS = "WWBKIT_WORKERS"


def resolve_workers(flag: Optional[int] = None) -> int:
    """Worker count from the flag, then ``WWBKIT_WORKERS``, then the CPU count."""
    if flag is not None:
        n = int(flag)
    elif os.environ.get(ENV_WORKERS):
        try:
            n = int(os.environ[ENV_WORKERS])
        except ValueError:
            raise ValueError(f"{ENV_WORKERS} must be an integer") from None
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise ValueError("worker count must be >= 1")
    return n


def ordered_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally spread over processes.

    Results come back in input order whatever the completion order.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
