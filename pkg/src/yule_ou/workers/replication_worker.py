import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Optional

import numpy as np
from tqdm import tqdm

from yule_ou.common.exceptions import DegenerateVarianceError
from yule_ou.configurations.config import settings

logger = logging.getLogger(__name__)

ReplicationTask = Callable[[int], float]


def _run_chunk(
    task: ReplicationTask, start: int, stop: int, values: np.ndarray
) -> int:
    """Fill values[start:stop]; degenerate replications become NaN."""
    skipped = 0
    for replication in range(start, stop):
        try:
            values[replication] = task(replication)
        except DegenerateVarianceError as e:
            logger.warning(f"Skipping replication {replication}: {e}")
            values[replication] = np.nan
            skipped += 1
    return skipped


def run_replications(
    task: ReplicationTask,
    count: int,
    max_workers: Optional[int] = None,
    description: str = "replications",
) -> np.ndarray:
    """Evaluate ``task`` for replication indices 0..count-1 on a thread pool.

    Results are written by index into one buffer with disjoint slices, so the
    output does not depend on the number of workers. Skipped replications
    are NaN.
    """
    workers = max_workers or settings.max_workers
    values = np.empty(count, dtype=np.float64)
    chunk = max(1, -(-count // (4 * workers)))
    bounds = [(start, min(start + chunk, count)) for start in range(0, count, chunk)]

    skipped = 0
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(_run_chunk, task, start, stop, values): stop - start
            for start, stop in bounds
        }
        with tqdm(
            total=count, desc=description, disable=not settings.show_progress
        ) as progress:
            for future in as_completed(futures):
                skipped += future.result()
                progress.update(futures[future])

    if skipped:
        logger.warning(f"{skipped} of {count} {description} skipped as degenerate")
    return values
