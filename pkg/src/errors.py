"""
Exception types raised by the plastic corrector.
The CLI maps them to exit codes (see src/main.py).
"""
from dataclasses import dataclass
from typing import Iterable, Optional


class CorrectorError(Exception):
    """Base class for every error raised by this package."""


class ParameterDomainError(CorrectorError, ValueError):
    """Material or solver parameter outside its admissible range."""


class InputError(CorrectorError, ValueError):
    """Malformed input file, bad index, bad selector or violated precondition."""


class CapabilityError(CorrectorError):
    """Operation needs data the record does not carry (e.g. tensors on a scalar-only row)."""


class ValidationError(CorrectorError, ValueError):
    """Input data is parseable but internally inconsistent."""

    def __init__(self, message: str, ids: Optional[Iterable[str]] = None):
        self.ids = list(ids or [])
        if self.ids:
            shown = ", ".join(self.ids[:20])
            more = f" (+{len(self.ids) - 20} more)" if len(self.ids) > 20 else ""
            message = f"{message}: {shown}{more}"
        super().__init__(message)


class ConvergenceError(CorrectorError):
    """Newton iterations and the bisection fallback both failed."""

    def __init__(self, message: str, point_id: Optional[str] = None, time_index: Optional[int] = None):
        self.point_id = point_id
        self.time_index = time_index
        super().__init__(message)


class TrainingError(CorrectorError):
    """Surrogate covariance could not be factorized even at maximum jitter."""


class FailureThresholdExceeded(CorrectorError):
    """Too many per-point numeric failures in a field run."""


@dataclass(frozen=True)
class PointFailure:
    """Per-point failure record; collected, never raised out of a field run."""
    point_id: str
    time_index: int
    message: str
