"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`InputError` subclasses exit with 2,
:class:`NumericalError` subclasses with 3.
"""

from __future__ import annotations


class HamspecError(Exception):
    """Base class for every error raised by the package."""


class InputError(HamspecError):
    """Malformed or semantically invalid input."""


class NumericalError(HamspecError):
    """A numerical procedure could not deliver a trustworthy answer."""


class ShapeError(InputError, ValueError):
    pass


class DomainError(InputError, ValueError):
    pass


class EvaluationError(InputError):
    """A coefficient could not be evaluated at some point."""

    def __init__(self, message: str, t=None):
        super().__init__(message)
        self.t = t


class ProblemParseError(InputError):
    """Schema violation in a problem document; ``path`` is a JSON pointer."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"


class PreconditionError(InputError):
    pass


class SizeError(InputError):
    pass


class StepError(NumericalError):
    """Singular ``I - A(n)`` met while stepping a discrete system."""

    def __init__(self, message: str, n=None):
        super().__init__(message)
        self.n = n


class StiffnessError(NumericalError):
    def __init__(self, message: str, t=None):
        super().__init__(message)
        self.t = t


class IntegrityError(NumericalError):
    pass


class BoundaryError(NumericalError):
    """The characteristic function nearly vanishes on a contour."""

    def __init__(self, message: str, lam=None):
        super().__init__(message)
        self.lam = lam


class IndeterminateCountError(NumericalError):
    pass


class ContourError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(NumericalError):
    pass


class BasisError(NumericalError):
    pass


class DegenerateProblemError(NumericalError):
    """The characteristic function vanishes identically on the search region."""
