"""
Error handling and custom exceptions for tvcone.
"""

from typing import Optional
import logging

logger = logging.getLogger(__name__)


class TvconeError(Exception):
    """Base exception for all tvcone errors."""

    exit_code = 1


class ConfigurationError(TvconeError):
    """Raised when a configuration file or section is invalid."""

    exit_code = 4


class ParameterError(ConfigurationError):
    """Raised when a parameter value violates its constraints."""

    def __init__(self, message: str, parameter_name: Optional[str] = None):
        super().__init__(message)
        self.parameter_name = parameter_name


class NyquistError(ConfigurationError):
    """Raised when the grid cannot represent the optical pass band."""

    def __init__(self, message: str, axis: str, required: float, available: float):
        super().__init__(message)
        self.axis = axis
        self.required = required
        self.available = available


class EmptyMaskError(ConfigurationError):
    """Raised when a support mask ends up with no measured frequency."""
    pass


class PhantomBoundsError(ConfigurationError):
    """Raised when a phantom shape does not fit inside the grid."""
    pass


class InputError(TvconeError):
    """Raised when array inputs are inconsistent or malformed."""

    exit_code = 4


class GridMismatchError(InputError):
    """Raised when two operands live on different grids."""
    pass


class NonFiniteError(InputError):
    """Raised when an input holds NaN or infinite values."""
    pass


class HermitianError(InputError):
    """Raised when a spectrum that must represent a real volume does not."""
    pass


class MissingInputError(TvconeError):
    """Raised when an input file does not exist."""

    exit_code = 3

    def __init__(self, message: str, path: str):
        super().__init__(message)
        self.path = path


class SolverAbortError(TvconeError):
    """Raised when the solver produces a non-finite intermediate."""

    exit_code = 5

    def __init__(self, message: str, phase: str, outer: int, inner: int):
        super().__init__(message)
        self.phase = phase
        self.outer = outer
        self.inner = inner


class CoverageHoleError(TvconeError):
    """Raised when stitching leaves a voxel without any patch weight."""
    pass


class DegenerateInputError(TvconeError):
    """Raised when a metric is undefined for its inputs."""
    pass


class VolumeFormatError(TvconeError):
    """Base class for Vol3File decoding errors."""

    exit_code = 6

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path


class BadMagicError(VolumeFormatError):
    """Raised when a file does not start with the VOL3 magic."""
    pass


class UnsupportedVersionError(VolumeFormatError):
    """Raised when the format version is not understood."""
    pass


class KindMismatchError(VolumeFormatError):
    """Raised when the payload kind differs from the requested one."""
    pass


class TruncatedPayloadError(VolumeFormatError):
    """Raised when the payload length disagrees with the header."""
    pass


class DimensionOverflowError(VolumeFormatError):
    """Raised when header dimensions exceed the allocation cap."""
    pass


def handle_error(error: Exception, context: str = "", verbose: bool = True) -> str:
    """Format errors consistently as a one-line diagnostic."""
    if isinstance(error, SolverAbortError):
        msg = f"{error} (phase '{error.phase}', outer {error.outer}, inner {error.inner})"

    elif isinstance(error, NyquistError):
        msg = (
            f"{error}: {error.axis} band needs {error.required:.4g} cycles/um, "
            f"grid Nyquist is {error.available:.4g} cycles/um"
        )

    elif isinstance(error, ParameterError):
        msg = str(error)
        if error.parameter_name:
            msg = f"Invalid parameter '{error.parameter_name}': {msg}"

    elif isinstance(error, (MissingInputError,)):
        msg = f"Missing input '{error.path}': {error}"

    elif isinstance(error, VolumeFormatError):
        msg = str(error)
        if error.path:
            msg = f"{error.path}: {msg}"

    elif isinstance(error, TvconeError):
        msg = str(error)

    else:
        # Generic error handling
        error_type = type(error).__name__
        msg = f"{error_type}: {error}" if verbose else error_type

    if context:
        msg = f"{context}: {msg}"
    return " ".join(msg.split())


def log_error(error: Exception, context: str = "", level: int = logging.ERROR) -> None:
    """Log errors with appropriate detail level."""
    message = handle_error(error, context, verbose=True)

    if isinstance(error, TvconeError):
        # These are expected errors that users should see
        logger.log(level, message)
    else:
        # Unexpected errors should include traceback
        logger.log(level, message, exc_info=True)


def exit_code_for(error: Exception) -> int:
    """Map an exception to the process exit code used by the CLI."""
    return getattr(error, "exit_code", 1) if isinstance(error, TvconeError) else 1
