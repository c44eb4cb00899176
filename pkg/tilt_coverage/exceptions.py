"""
Custom exceptions for the tilt coverage toolkit.

This module defines specific exception types for the different failure
scenarios so that the CLI can map them onto exit codes and the experiment
runner can tag failed evaluations.
"""


class TiltCoverageError(Exception):
    """Base exception for all tilt coverage errors."""

    def __init__(self, message: str, error_code: str = None, details: dict = None):
        """Initialize the exception with message, error code, and optional details."""
        super().__init__(message)
        self.message = message
        self.error_code = error_code or "UNKNOWN_ERROR"
        self.details = details or {}

    def __str__(self):
        """Return a formatted error message."""
        return f"[{self.error_code}] {self.message}"

    def __reduce__(self):
        # worker processes send errors back by pickle; keep details and extra state
        return (_rebuild_error, (type(self), self.message, dict(self.__dict__)))


def _rebuild_error(cls, message, state):
    error = cls(message)
    error.__dict__.update(state)
    return error


class ConfigurationError(TiltCoverageError, ValueError):
    """Raised when a configuration value or file is invalid."""

    def __init__(self, message: str, field: str = None, line: int = None, details: dict = None):
        error_details = {}
        if field:
            error_details["field"] = field
        if line is not None:
            error_details["line"] = line
        if details:
            error_details.update(details)
        super().__init__(message, "CONFIG_ERROR", error_details)


class ValidationError(TiltCoverageError, ValueError):
    """Raised when an experiment request fails validation."""

    def __init__(self, message: str, field: str = None, value: str = None, details: dict = None):
        error_details = {}
        if field:
            error_details["field"] = field
        if value is not None:
            error_details["value"] = value
        if details:
            error_details.update(details)
        super().__init__(message, "VALIDATION_ERROR", error_details)


class DomainError(TiltCoverageError, ValueError):
    """Raised when a primitive is evaluated outside its mathematical domain."""

    def __init__(self, message: str, argument: str = None, value: float = None, details: dict = None):
        error_details = {}
        if argument:
            error_details["argument"] = argument
        if value is not None:
            error_details["value"] = value
        if details:
            error_details.update(details)
        super().__init__(message, "DOMAIN_ERROR", error_details)


class NumericalError(TiltCoverageError):
    """Raised when a numerical procedure exhausts its evaluation budget."""

    def __init__(self, message: str, partial_result=None, evaluations: int = 0, details: dict = None):
        error_details = {"evaluations": evaluations}
        if details:
            error_details.update(details)
        super().__init__(message, "NUMERICAL_ERROR", error_details)
        self.partial_result = partial_result
        self.evaluations = evaluations

    def tagged(self, **tags) -> "NumericalError":
        """Return a copy of this error carrying extra context tags."""
        details = dict(self.details)
        details.update(tags)
        tag_str = ", ".join(f"{k}={v}" for k, v in tags.items())
        return NumericalError(
            f"{self.message} ({tag_str})" if tag_str else self.message,
            partial_result=self.partial_result,
            evaluations=self.evaluations,
            details=details,
        )


class ResultExportError(TiltCoverageError):
    """Raised when a result table cannot be written."""

    def __init__(self, message: str, file_path: str = None, details: dict = None):
        error_details = {"file_path": file_path} if file_path else {}
        if details:
            error_details.update(details)
        super().__init__(message, "RESULT_EXPORT_ERROR", error_details)


class FileOperationError(TiltCoverageError):
    """Raised when file operations fail."""

    def __init__(self, message: str, file_path: str = None, operation: str = None, details: dict = None):
        error_details = {}
        if file_path:
            error_details["file_path"] = file_path
        if operation:
            error_details["operation"] = operation
        if details:
            error_details.update(details)
        super().__init__(message, "FILE_OPERATION_ERROR", error_details)


class PartialResultsError(TiltCoverageError):
    """Raised when an experiment partially fails but some rows are available."""

    def __init__(self, message: str, successful_count: int = 0, failed_count: int = 0,
                 partial_results: list = None, details: dict = None):
        error_details = {
            "successful_count": successful_count,
            "failed_count": failed_count,
            "total_requested": successful_count + failed_count
        }
        if partial_results:
            error_details["partial_results_available"] = True
            error_details["partial_results_count"] = len(partial_results)
        if details:
            error_details.update(details)
        super().__init__(message, "PARTIAL_RESULTS_ERROR", error_details)
        self.partial_results = partial_results or []


# CLI exit codes per error family
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3
EXIT_IO_FAILURE = 4


def exit_code_for(error: Exception) -> int:
    """Map an exception onto the CLI exit code contract."""
    if isinstance(error, (ResultExportError, FileOperationError, OSError)):
        return EXIT_IO_FAILURE
    if isinstance(error, (NumericalError, PartialResultsError)):
        return EXIT_NUMERICAL_FAILURE
    if isinstance(error, (ConfigurationError, ValidationError, DomainError)):
        return EXIT_CONFIG_ERROR
    return EXIT_NUMERICAL_FAILURE
