"""Exception types raised across the package."""


class GenMeansError(Exception):
    """Base class for all package errors."""


class DomainError(GenMeansError, ValueError):
    """An input lies outside the domain required by a mean or generator."""


class NumericalError(GenMeansError, ArithmeticError):
    """A non-finite intermediate appeared (overflow, underflow to zero)."""


class DegenerateError(GenMeansError, ValueError):
    """A variance or moment needed by a limit theorem is zero or missing."""


class OversubscriptionError(GenMeansError, ValueError):
    """The initial apportionment rule hands out more seats than the house has."""


class SpecError(GenMeansError, ValueError):
    """An experiment spec or CLI argument is malformed."""
