"""
Custom exceptions for mlnn

This module defines the exception hierarchy used across the solvers, the
neural-network engine and the multi-level pipeline. Every error carries a
details dictionary so the CLI and the run report can show what went wrong
without parsing messages.
"""

from typing import Any, Dict, List, Optional


class MlnnError(Exception):
    """Base exception class for mlnn."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """
        Initialize MlnnError.

        Args:
            message: Error message
            details: Optional dictionary with additional error details
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        """String representation of the error."""
        return self.message


class ConfigurationError(MlnnError):
    """Raised when a run configuration is missing, malformed or invalid."""


class ValidationError(MlnnError):
    """Raised when an argument value is outside its allowed range."""


class ShapeError(ValidationError):
    """Raised when array shapes, channel counts or ranks disagree."""


class FileError(MlnnError):
    """Raised when there's a file-related error."""

    def __init__(self, message: str, file_path: Optional[str] = None):
        """
        Initialize FileError.

        Args:
            message: Error message
            file_path: Path to the problematic file
        """
        super().__init__(message, {"file_path": file_path})
        self.file_path = file_path


class SolverError(MlnnError):
    """Raised when a PDE solve fails."""


class ConvergenceError(SolverError):
    """Raised when Newton iteration does not reach its tolerance."""

    def __init__(
        self,
        message: str,
        residual: float,
        iterations: int,
        details: Optional[Dict[str, Any]] = None,
    ):
        """
        Initialize ConvergenceError.

        Args:
            message: Error message
            residual: Max-norm residual of the last iterate
            iterations: Number of Newton iterations performed
            details: Optional extra details
        """
        merged = {"residual": residual, "iterations": iterations}
        merged.update(details or {})
        super().__init__(message, merged)
        self.residual = residual
        self.iterations = iterations


class SingularSystemError(SolverError):
    """Raised when a linear system or Jacobian is singular."""


class DegenerateDiagnosticError(MlnnError):
    """Raised when the level-error similarity check has a zero denominator."""


class TrainingDivergenceError(MlnnError):
    """Raised when the training loss becomes non-finite."""

    def __init__(
        self, message: str, epoch: int, details: Optional[Dict[str, Any]] = None
    ):
        merged = {"epoch": epoch}
        merged.update(details or {})
        super().__init__(message, merged)
        self.epoch = epoch


class GridSearchError(MlnnError):
    """Raised when every hyperparameter combination diverged."""

    def __init__(self, message: str, failures: List[Dict[str, Any]]):
        super().__init__(message, {"failures": failures})
        self.failures = failures


class EnrichmentError(MlnnError):
    """Raised when sample enrichment exceeds its round cap."""

    def __init__(self, message: str, level: int, v_history: List[float]):
        super().__init__(message, {"level": level, "v_history": v_history})
        self.level = level
        self.v_history = v_history


class CollocationError(MlnnError):
    """Raised when a collocation grid hits its refinement cap."""


class RunError(MlnnError):
    """Raised when a pipeline run fails; carries the partial report."""

    def __init__(
        self,
        message: str,
        partial_report: Optional[Dict[str, Any]] = None,
        cause: Optional[BaseException] = None,
    ):
        super().__init__(message, {"partial_report": partial_report or {}})
        self.partial_report = partial_report or {}
        self.cause = cause


def format_error_message(error: MlnnError) -> str:
    """
    Format error message for user display.

    Args:
        error: The error to format

    Returns:
        Formatted error message
    """
    if isinstance(error, ConfigurationError):
        return f"Configuration Error: {error.message}"

    if isinstance(error, FileError):
        msg = f"File Error: {error.message}"
        if error.file_path:
            msg += f"\nFile: {error.file_path}"
        return msg

    if isinstance(error, ShapeError):
        return f"Shape Error: {error.message}"

    if isinstance(error, ValidationError):
        return f"Validation Error: {error.message}"

    if isinstance(error, ConvergenceError):
        return (
            f"Convergence Error: {error.message} "
            f"(residual {error.residual:.3e} after {error.iterations} iterations)"
        )

    if isinstance(error, SolverError):
        return f"Solver Error: {error.message}"

    if isinstance(error, TrainingDivergenceError):
        return f"Training Error: {error.message} (epoch {error.epoch})"

    if isinstance(error, EnrichmentError):
        history = ", ".join(f"{v:.3e}" for v in error.v_history[-5:])
        return f"Enrichment Error: {error.message} (last v_min: {history})"

    if isinstance(error, RunError):
        return f"Run Error: {error.message}"

    return f"Error: {error.message}"
