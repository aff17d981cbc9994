"""Deterministic compensated pairwise reduction and worker-count resolution."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

THREADS_ENV = "LAPZETA_THREADS"


def pairwise_sum(values) -> float:
    """Sum ``values`` over a fixed binary tree with TwoSum error compensation.

    The tree depends only on the length of the input, never on the machine or
    on how the input was produced, so equal inputs give bit-identical sums.
    """
    x = np.array(values, dtype=np.float64).ravel()
    if x.size == 0:
        return 0.0
    comp = np.zeros_like(x)
    while x.size > 1:
        if x.size % 2:
            x = np.append(x, 0.0)
            comp = np.append(comp, 0.0)
        a, b = x[0::2], x[1::2]
        s = a + b
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
        comp = comp[0::2] + comp[1::2] + err
        x = s
    return float(x[0] + comp[0])


def resolve_workers(workers: int | None = None) -> int:
    """Number of worker threads: explicit argument, else ``LAPZETA_THREADS``, else 1."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is None or raw == "":
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if workers < 1:
        raise ValueError(f"worker count must be positive, got {workers}")
    return workers


def ordered_map(fn: Callable[[int], T], count: int, workers: int | None = None) -> list[T]:
    """``[fn(0), ..., fn(count - 1)]`` evaluated on a thread pool, order preserved."""
    nw = resolve_workers(workers)
    if nw == 1 or count <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=min(nw, count)) as pool:
        return list(pool.map(fn, range(count)))


def tree_reduce(partials: Sequence[float]) -> float:
    return pairwise_sum(np.asarray(partials, dtype=np.float64))
