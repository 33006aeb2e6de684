"""Exception types shared across the vddp package."""

from typing import Any, Dict, Optional


class VddpError(Exception):
    """Base class for every error raised by vddp."""


class ParameterError(VddpError, ValueError):
    """A precondition on parameters or inputs does not hold."""


class NonInvertibleError(ParameterError, ZeroDivisionError):
    """Inversion of zero in a prime field."""


class DomainSizeError(ParameterError):
    """Requested evaluation domain does not exist in the field."""


class PrecisionCollapseError(ParameterError):
    """A realized Bernoulli probability rounded to 0 or 1."""


class InfeasibleParamsError(ParameterError):
    """Parameter search found no configuration meeting the targets."""

    def __init__(self, message: str, nearest_miss: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.nearest_miss = nearest_miss


class MalformedMessageError(VddpError):
    """A transcript message is missing, out of order or badly encoded."""


class PhaseError(VddpError):
    """A session step was attempted out of phase order."""


class TransportError(VddpError):
    """The transport failed to deliver a message."""
