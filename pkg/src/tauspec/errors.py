"""Exception and warning types shared across the package."""

__all__ = [
    "TauError",
    "ConfigurationError",
    "ValidationError",
    "SingularSystemError",
    "ConvergenceWarning",
    "TruncationWarning",
    "ExtrapolationWarning",
]


class TauError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(TauError):
    """Unsupported basis family, bad domain, or invalid solver settings."""


class ValidationError(TauError):
    """A problem document or ProblemSpec failed validation.

    Carries the location of the offending entry (a dotted path such as
    ``equations[0].terms[2].kernel``) so command-line users can find it.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class SingularSystemError(TauError):
    """The assembled linear system is numerically singular."""


class ConvergenceWarning(UserWarning):
    """Iteration stopped without meeting the requested tolerance."""


class TruncationWarning(UserWarning):
    """Polynomial data was cut to the working number of coefficients."""


class ExtrapolationWarning(UserWarning):
    """Evaluation points fall outside the basis domain."""
