from typing import Callable, List, Optional, TypeVar
import concurrent.futures
import logging
import os
import sys

logger = logging.getLogger(__name__)

CHUNK_SIZE = 250

T = TypeVar('T')


def default_workers() -> int:
    return min(32, os.cpu_count() or 1)


def chunk_sizes(trials: int, chunk: int = CHUNK_SIZE) -> List[int]:
    """Split trials into fixed-size chunks; the last one takes the remainder."""
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


class MonteCarloRunner:
    """Coordinates independent Monte Carlo chunks across a thread pool."""

    def __init__(self, workers: Optional[int] = None, show_progress: bool = False):
        self.workers = workers or default_workers()
        self.show_progress = show_progress

    def map(self, task: Callable[[int], T], n_tasks: int, label: str = "chunks") -> List[T]:
        """
        Run task(0), ..., task(n_tasks - 1) in parallel.

        Results come back in task order whatever the completion order, so any
        reduction over them is independent of the worker count.
        """
        results: List[Optional[T]] = [None] * n_tasks
        if n_tasks == 0:
            return []
        completed = 0
        logger.info("running %d %s on %d workers", n_tasks, label, min(self.workers, n_tasks))

        with concurrent.futures.ThreadPoolExecutor(max_workers=min(self.workers, n_tasks)) as executor:
            future_to_chunk = {executor.submit(task, chunk): chunk for chunk in range(n_tasks)}

            for future in concurrent.futures.as_completed(future_to_chunk):
                chunk = future_to_chunk[future]
                completed += 1
                try:
                    results[chunk] = future.result()
                except Exception:
                    logger.exception("Monte Carlo chunk %d failed", chunk)
                    for pending in future_to_chunk:
                        pending.cancel()
                    raise

                if self.show_progress:
                    progress = (completed * 100) // n_tasks
                    print(f"\rProgress: {progress}% ({completed}/{n_tasks} {label} completed)",
                          end="", file=sys.stderr)

        if self.show_progress:
            print(file=sys.stderr)
        return results
