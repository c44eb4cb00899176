"""
Bounded concurrent execution of independent evaluation tasks.

Tasks are picklable zero-argument callables (module-level functions wrapped
in functools.partial). With one job they run inline; otherwise a process
pool runs them under a semaphore. Results always come back in submission
order, with exceptions returned in place of the failed task's result.
"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence

from tqdm import tqdm

logger = logging.getLogger(__name__)

Task = Callable[[], Any]


class WorkerPool:
    """Runs evaluation tasks with at most `jobs` in flight."""

    def __init__(self, jobs: int = 1, show_progress: bool = False):
        """Initialize the pool with a job limit."""
        if jobs < 1:
            raise ValueError("jobs must be at least 1")
        self.jobs = jobs
        self.show_progress = show_progress
        logger.info(f"WorkerPool initialized with jobs={jobs}")

    def run(self, tasks: Sequence[Task], description: str = "tasks") -> List[Any]:
        """Run all tasks; the i-th entry is task i's result or the exception it raised."""
        if not tasks:
            return []

        start_time = time.time()
        if self.jobs == 1:
            results = self._run_inline(tasks, description)
        else:
            results = asyncio.run(self._run_concurrent(tasks, description))

        failures = sum(1 for r in results if isinstance(r, Exception))
        duration = time.time() - start_time
        logger.info(f"{description}: {len(tasks) - failures}/{len(tasks)} successful in {duration:.2f}s")
        return results

    def _run_inline(self, tasks: Sequence[Task], description: str) -> List[Any]:
        results = []
        for task in tqdm(tasks, desc=description, disable=not self.show_progress):
            try:
                results.append(task())
            except Exception as e:
                logger.error(f"Task failed in {description}: {e}")
                results.append(e)
        return results

    async def _run_concurrent(self, tasks: Sequence[Task], description: str) -> List[Any]:
        # Create semaphore to limit tasks in flight
        semaphore = asyncio.Semaphore(self.jobs)
        loop = asyncio.get_running_loop()
        progress = tqdm(total=len(tasks), desc=description, disable=not self.show_progress)

        with ProcessPoolExecutor(max_workers=self.jobs) as executor:
            async def run_with_semaphore(task: Task):
                async with semaphore:
                    try:
                        return await loop.run_in_executor(executor, task)
                    finally:
                        progress.update(1)

            results = await asyncio.gather(*(run_with_semaphore(t) for t in tasks),
                                           return_exceptions=True)
        progress.close()

        for index, result in enumerate(results):
            if isinstance(result, Exception):
                logger.error(f"Task {index} failed in {description}: {result}")
        return list(results)
