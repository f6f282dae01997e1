"""Chunked, thread-count independent evaluation.

Work is split into fixed chunks before any thread sees it and partial results
are combined with :func:`math.fsum`, so results do not depend on how many
workers ran.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

R = TypeVar("R")

CHUNK = 1 << 16


def thread_count() -> int:
    raw = os.environ.get("SNOWFLAKE_THREADS", "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError("SNOWFLAKE_THREADS must be a positive integer")
    return n


def map_ordered(fn: Callable[[int], R], n_tasks: int) -> list[R]:
    """``[fn(0), ..., fn(n_tasks - 1)]``, possibly evaluated on several threads."""
    workers = min(thread_count(), n_tasks)
    if workers <= 1:
        return [fn(i) for i in range(n_tasks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_tasks)))


def chunk_bounds(total: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]


def exact_sum(parts: Sequence[float]) -> float:
    return math.fsum(parts)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, index)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
