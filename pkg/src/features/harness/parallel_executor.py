"""Parallel realization runner with a sequential fallback."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Sequence, TypeVar

import psutil

from shared.constants import MAX_WORKERS, MIN_WORKERS, WORKERS_ENV

logger = logging.getLogger(__name__)

Item = TypeVar("Item")
Result = TypeVar("Result")


def resolve_workers() -> int:
    """Worker count from FLEXO_WORKERS, else the physical core count, clamped to sane bounds."""
    try:
        env_value = os.getenv(WORKERS_ENV)
        if env_value:
            return max(MIN_WORKERS, min(int(env_value), MAX_WORKERS))
    except (TypeError, ValueError):
        logger.debug("Invalid %s value; using core count", WORKERS_ENV)
    cores = psutil.cpu_count(logical=False) or os.cpu_count() or MIN_WORKERS
    return max(MIN_WORKERS, min(cores, MAX_WORKERS))


def log_resident_memory(label: str) -> None:
    try:
        rss_mb = psutil.Process(os.getpid()).memory_info().rss / (1024 ** 2)
        logger.info("%s: RSS=%.1f MB", label, rss_mb)
    except psutil.Error as error:
        logger.debug("Could not read resident memory: %s", error)


def _run_parallel_pass(
    items: Sequence[Item],
    workers: int,
    task: Callable[[int, Item], Result],
    results: Dict[int, Result],
) -> None:
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(task, index, item): index for index, item in enumerate(items)}
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()


def _run_sequential_fallback(
    items: Sequence[Item],
    task: Callable[[int, Item], Result],
    results: Dict[int, Result],
) -> None:
    """Run the items the parallel pass did not finish."""
    for index, item in enumerate(items):
        if index not in results:
            results[index] = task(index, item)


def run_realizations(
    items: Sequence[Item],
    task: Callable[[int, Item], Result],
    workers: Optional[int] = None,
    on_parallel_error: Optional[Callable[[Exception], None]] = None,
) -> List[Result]:
    """
    Parallel-first map of task(index, item) with sequential fallback.

    Results come back in input order whatever the completion order, so
    aggregation is deterministic.
    """
    items = list(items)
    results: Dict[int, Result] = {}
    workers = workers or resolve_workers()
    if workers <= 1 or len(items) <= 1:
        _run_sequential_fallback(items, task, results)
    else:
        try:
            _run_parallel_pass(items, workers, task, results)
        except Exception as exc:
            logger.warning("Parallel pass failed (%s); finishing sequentially", exc)
            if on_parallel_error is not None:
                on_parallel_error(exc)
            _run_sequential_fallback(items, task, results)
    return [results[index] for index in range(len(items))]
