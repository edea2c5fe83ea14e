# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Exception classes for tensor-ccs."""

from typing import Optional, Tuple

import pydantic

EXIT_OK = 0
EXIT_PARAMETER = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


class TensorCcsError(Exception):
    """Base exception for all tensor-ccs errors."""

    exit_code: int = 1

    def __init__(self, message: str, hint: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.hint = hint

    def __str__(self) -> str:
        if self.hint:
            return f"{self.message} (hint: {self.hint})"
        return self.message


class ParameterError(TensorCcsError):
    """Exception raised when an argument is outside its admissible range."""

    exit_code = EXIT_PARAMETER


class ShapeError(ParameterError):
    """Exception raised when tensor or matrix dimensions do not conform."""


class IndexRangeError(ParameterError):
    """Exception raised when an index set addresses a coordinate out of bounds."""


class CapExceededError(ParameterError):
    """Exception raised when an operation would materialize more entries than allowed."""

    def __init__(self, message: str, requested: int, cap: int, hint: Optional[str] = None):
        super().__init__(message, hint)
        self.requested = requested
        self.cap = cap


class PlanValidationError(ParameterError):
    """Exception raised when an observation set or plan violates its invariants."""


class TensorIOError(TensorCcsError):
    """Exception raised when reading or writing tensor and plan files fails."""

    exit_code = EXIT_IO


class ParseError(TensorIOError):
    """Exception raised for malformed files; ``offset`` is the byte where parsing stopped."""

    def __init__(self, message: str, offset: int = 0, path: Optional[str] = None):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset
        self.path = path


class NumericalError(TensorCcsError):
    """Exception raised when a numerical kernel fails or produces an invalid result."""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str, slice_index: Optional[int] = None, hint: Optional[str] = None):
        if slice_index is not None:
            message = f"{message} (frontal slice {slice_index})"
        super().__init__(message, hint)
        self.slice_index = slice_index


class DomainError(NumericalError):
    """Exception raised when a quantity is undefined for the given input (e.g. zero tensor)."""


class ConvergenceFailure(NumericalError):
    """Exception raised when a solver stops at its iteration cap and convergence was required."""

    def __init__(self, message: str, iterations: int, last_error: float):
        super().__init__(
            f"{message} after {iterations} iterations (last e_k {last_error:.3e})",
            hint="raise --max-iter or loosen --tol",
        )
        self.iterations = iterations
        self.last_error = last_error


class DivergenceError(NumericalError):
    """Exception raised when an iterative solver's residual keeps growing."""

    def __init__(self, message: str, step_sizes: Tuple[float, ...]):
        steps = ", ".join(f"{eta:g}" for eta in step_sizes)
        super().__init__(
            f"{message}; step sizes ({steps})",
            hint="reduce the step sizes or use step_rule='unit'",
        )
        self.step_sizes = step_sizes


class SubsolverError(NumericalError):
    """Exception raised when the slab completion routine of TSTC fails."""

    def __init__(self, message: str, slab: str):
        super().__init__(f"slab {slab}: {message}")
        self.slab = slab


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit code used by the command line.

    Args:
        error: Exception raised while running a command

    Returns:
        2 for parameter errors, 3 for I/O errors, 4 for numerical errors
    """
    if isinstance(error, TensorCcsError):
        return error.exit_code
    if isinstance(error, pydantic.ValidationError):
        return EXIT_PARAMETER
    if isinstance(error, OSError):
        return EXIT_IO
    if isinstance(error, (ValueError, TypeError)):
        return EXIT_PARAMETER
    if isinstance(error, ArithmeticError):
        return EXIT_NUMERICAL
    return 1
