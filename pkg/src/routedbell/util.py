"""Shared helpers: seeded RNG construction, CSV number formatting, worker pools."""
from __future__ import annotations

import multiprocessing
import os
from typing import Callable, Iterable, Sequence

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so parallel shards can be derived reproducibly."""
    return np.random.Generator(np.random.Philox(seed))


def shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=shard))


def fmt17(x: float) -> str:
    """Render a float with 17 significant digits (round-trips float64 exactly)."""
    return format(float(x), ".17g")


def parallel_map(fn: Callable, items: Sequence, jobs: int | None = None) -> list:
    """Map `fn` over `items`, optionally across a process pool.

    Results keep the input order.  `fn` must be picklable (module level) when
    jobs > 1.
    """
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with multiprocessing.Pool(min(jobs, len(items))) as pool:
        return pool.map(fn, items)
