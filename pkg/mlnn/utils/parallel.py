"""
Ordered parallel map over independent tasks

Solver batches, grid-search cells and collocation node solves are independent;
they run on a thread pool capped by --jobs. Results keep input order so the
outcome never depends on scheduling.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> List[R]:
    """
    Apply fn to every item, in order.

    Args:
        fn: Pure function of one item
        items: Inputs
        jobs: Worker cap; 1 runs inline

    Returns:
        Results in input order. The first exception raised by any task
        propagates after all tasks were submitted.
    """
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def task_seed(seed: int, *keys: int) -> int:
    """Seed for one named task, e.g. (level, round, cell), fixed by the root seed."""
    sequence = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
