"""Exception types shared across the package."""


class SteinError(Exception):
    """Base class for all package errors."""


class DomainError(SteinError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NonConvergence(SteinError, ArithmeticError):
    """An iterative numerical scheme exhausted its budget before meeting its tolerance."""


class NoBracket(SteinError, ValueError):
    """A root search was started on an interval without a sign change."""


class InvalidTarget(SteinError, ValueError):
    """A target specification violates one of the standing conditions on (p, gamma)."""


class MissingNorm(SteinError, ValueError):
    """A bound needs a test-function norm that was not declared."""


class SizeLimit(SteinError, ValueError):
    """A brute-force enumeration was requested beyond its size cap."""


class ExactIdentityError(SteinError, AssertionError):
    """An identity that must hold in exact rational arithmetic failed."""
