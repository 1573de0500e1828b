"""Exception hierarchy shared by all modules."""


class GaussianError(Exception):
    """Base class for all package errors."""


class StructuralError(GaussianError, ValueError):
    """Raised for malformed inputs: wrong shapes, odd sizes, bad partitions."""


class ValidityError(GaussianError, ValueError):
    """Raised when a matrix violates a physical constraint.

    The ``magnitude`` attribute carries the size of the worst violation
    (e.g. the most negative eigenvalue of ``Gamma + i sigma``).
    """

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class NumericalDomainError(GaussianError, ArithmeticError):
    """Raised when a numerical routine is handed input outside its domain."""
