"""
Tests for WorkerPool.
"""

from functools import partial

import pytest

from tilt_coverage.exceptions import NumericalError
from tilt_coverage.worker_pool import WorkerPool


def square(value):
    return value * value


def fail_on(value, bad):
    if value == bad:
        raise NumericalError(f"cannot evaluate {value}", details={"value": value})
    return value


class TestWorkerPool:
    """Test cases for WorkerPool."""

    def test_invalid_job_count(self):
        with pytest.raises(ValueError):
            WorkerPool(jobs=0)

    def test_empty_task_list(self):
        assert WorkerPool().run([]) == []

    def test_inline_results_in_order(self):
        tasks = [partial(square, v) for v in range(6)]
        assert WorkerPool(jobs=1).run(tasks) == [0, 1, 4, 9, 16, 25]

    def test_inline_failure_returned_in_place(self):
        results = WorkerPool(jobs=1).run([partial(fail_on, v, 2) for v in range(4)])
        assert results[:2] == [0, 1]
        assert isinstance(results[2], NumericalError)
        assert results[3] == 3

    def test_process_pool_keeps_submission_order(self):
        tasks = [partial(square, v) for v in range(10)]
        assert WorkerPool(jobs=3).run(tasks, description="squares") == [v * v for v in range(10)]

    def test_process_pool_returns_exceptions_with_details(self):
        """Test that errors raised in worker processes come back intact."""
        results = WorkerPool(jobs=2).run([partial(fail_on, v, 1) for v in range(3)])
        error = results[1]
        assert isinstance(error, NumericalError)
        assert error.details["value"] == 1
        assert error.error_code == "NUMERICAL_ERROR"
        assert results[0] == 0 and results[2] == 2
