"""
Thread fan-out helper.

Work items are submitted to a ThreadPoolExecutor and results are returned
in submission order, so merged outputs never depend on scheduling.
"""

import concurrent.futures
import logging
from typing import Callable, Dict, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_parallel(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """
    Applies ``func`` to every item, optionally on a thread pool.

    Worker exceptions propagate to the caller after being logged.
    """
    work = list(items)
    if threads <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    results: Dict[int, R] = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        future_to_index = {executor.submit(func, item): i for i, item in enumerate(work)}
        for future in concurrent.futures.as_completed(future_to_index):
            index = future_to_index[future]
            try:
                results[index] = future.result()
            except Exception as exc:
                logger.error("Work item %d generated an exception: %s", index, exc)
                raise
    return [results[i] for i in range(len(work))]
