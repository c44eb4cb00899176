"""
Tests for the exception hierarchy, exit-code mapping and error logging.

These tests verify that failures carry their context, survive the trip back
from worker processes and turn into the right user-facing message.
"""

import pickle
import shutil
import tempfile
from pathlib import Path

import pytest

from tilt_coverage.exceptions import (
    ConfigurationError,
    DomainError,
    FileOperationError,
    NumericalError,
    PartialResultsError,
    ResultExportError,
    TiltCoverageError,
    ValidationError,
    exit_code_for,
)
from tilt_coverage.logging_config import ExperimentLogger, get_user_friendly_error_message, log_system_info


class TestExceptions:
    """Test the exception types and their context."""

    def test_formatted_message(self):
        error = ConfigurationError("bad value", field="network.h0", line=7)
        assert str(error) == "[CONFIG_ERROR] bad value"
        assert error.details == {"field": "network.h0", "line": 7}

    def test_value_errors(self):
        """Test that input errors can also be caught as ValueError."""
        for error in (ConfigurationError("x"), ValidationError("x"), DomainError("x")):
            assert isinstance(error, ValueError)
            assert isinstance(error, TiltCoverageError)

    def test_numerical_error_tagging(self):
        error = NumericalError("did not converge", partial_result=0.42, evaluations=150)
        tagged = error.tagged(beta_deg=12.0, sir_threshold_db=4.0)

        assert tagged.details["beta_deg"] == 12.0
        assert tagged.details["evaluations"] == 150
        assert tagged.partial_result == 0.42
        assert "beta_deg=12.0" in tagged.message
        assert "beta_deg" not in error.details

    @pytest.mark.parametrize("error", [
        ConfigurationError("cfg", field="a.b", line=3),
        NumericalError("num", partial_result=1.5, evaluations=9, details={"beta_deg": 3.0}),
        PartialResultsError("partial", successful_count=2, failed_count=1, partial_results=["r1", "r2"]),
        ResultExportError("export", file_path="/x.csv"),
    ])
    def test_pickle_round_trip(self, error):
        """Test that errors keep code and details through pickling."""
        restored = pickle.loads(pickle.dumps(error))
        assert type(restored) is type(error)
        assert str(restored) == str(error)
        assert restored.details == error.details

    def test_partial_results_details(self):
        error = PartialResultsError("2 failed", successful_count=5, failed_count=2, partial_results=[1] * 5)
        assert error.details["total_requested"] == 7
        assert error.details["partial_results_count"] == 5

    @pytest.mark.parametrize("error,code", [
        (ConfigurationError("x"), 2),
        (ValidationError("x"), 2),
        (DomainError("x"), 2),
        (NumericalError("x"), 3),
        (PartialResultsError("x"), 3),
        (ResultExportError("x"), 4),
        (FileOperationError("x"), 4),
        (PermissionError("x"), 4),
    ])
    def test_exit_codes(self, error, code):
        assert exit_code_for(error) == code


class TestExperimentLogger:
    """Test the logger set-up used by the CLI."""

    def setup_method(self):
        """Set up test environment before each test."""
        self.temp_dir = tempfile.mkdtemp()
        self.experiment_logger = ExperimentLogger(name="tilt_coverage_test", log_dir=self.temp_dir)

    def teardown_method(self):
        """Clean up test environment after each test."""
        self.experiment_logger.close()
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _log_text(self) -> str:
        for handler in self.experiment_logger.get_logger().handlers:
            handler.flush()
        return "".join(p.read_text(encoding="utf-8") for p in Path(self.temp_dir).glob("*_rotating.log"))

    def test_handlers_created_once(self):
        count = len(self.experiment_logger.get_logger().handlers)
        ExperimentLogger(name="tilt_coverage_test", log_dir=self.temp_dir)
        assert len(self.experiment_logger.get_logger().handlers) == count == 4

    def test_error_with_context(self):
        error = NumericalError("did not converge").tagged(beta_deg=7.5)
        self.experiment_logger.log_error_with_context(error, {"scenario": "fig3", "mode": "2dbf"})
        text = self._log_text()
        assert "NumericalError" in text
        assert "scenario=fig3" in text
        errors = "".join(p.read_text() for p in Path(self.temp_dir).glob("*_errors_*.log"))
        assert "did not converge" in errors

    def test_evaluation_and_stats(self):
        self.experiment_logger.log_evaluation("analytic", 12.5, "success", 0.25, {"mode": "3dbf_height_aware"})
        self.experiment_logger.log_evaluation("analytic", None, "success")
        self.experiment_logger.log_run_stats({"tasks": 8, "failed": 0})
        text = self._log_text()
        assert "Eval: analytic beta=12.5 | Status: success (0.25s) | mode=3dbf_height_aware" in text
        assert "Eval: analytic beta=-" in text
        assert "Run Stats: tasks=8, failed=0" in text

    def test_system_info(self):
        log_system_info(self.experiment_logger.get_logger())
        text = self._log_text()
        assert "Python Version" in text
        assert "numpy" in text

    def test_console_colours_do_not_leak_into_files(self):
        self.experiment_logger.get_logger().warning("plain warning")
        assert "\033[" not in self._log_text()


class TestUserFriendlyErrorMessages:
    """Test user-friendly error message generation."""

    def test_configuration_error_message(self):
        message = get_user_friendly_error_message(ConfigurationError("Unknown key 'x'"))
        assert "Configuration Error" in message
        assert "validate" in message

    def test_numerical_error_message(self):
        message = get_user_friendly_error_message(NumericalError("budget"))
        assert "Numerical Failure" in message
        assert "max_panels" in message

    def test_partial_results_message(self):
        message = get_user_friendly_error_message(PartialResultsError("1 of 4 failed"))
        assert "Partial Results" in message

    def test_permission_error_message(self):
        message = get_user_friendly_error_message(PermissionError("[Errno 13] Permission denied: 'out.csv'"))
        assert "Permission Error" in message

    def test_generic_error_message(self):
        """Test generic error message for unknown errors."""
        message = get_user_friendly_error_message(Exception("Some unknown error"))
        assert "Unexpected Error" in message
        assert "Some unknown error" in message
