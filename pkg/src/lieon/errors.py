"""Exception types shared across the package."""


class LieonError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(LieonError):
    """Operands live on spaces of different dimensions."""


class JacobiError(LieonError):
    """A bracket table fails the Jacobi identity."""


class ClosureError(LieonError):
    """A subspace is not closed the way the operation requires."""


class DegreeError(LieonError):
    """A multivector does not have the xi-degree the operation requires."""


class ConversionError(LieonError):
    """A bivector cannot be converted to a Lie algebra structure."""


class AlreadyUnimodularError(LieonError):
    """Modular disassembling requested for an algebra with zero modular vector."""


class NotModularError(LieonError):
    """The defining operator of a would-be modular algebra has zero trace."""


class InvalidMatchingError(LieonError):
    """A matching quadruple/quintuple violates its invariants."""


class IncompatibleLieonsError(LieonError):
    """First-level assembly was asked to sum lieons that are not compatible."""

    def __init__(self, pair, message=None):
        self.pair = pair
        super().__init__(message or f"incompatible lieon pair {pair}")


class DegeneratePairError(LieonError):
    """An involution or d-pair is degenerate (W = 0)."""


class IncompleteSchemeError(LieonError):
    """A census was requested for a scheme whose end terms are not all lieons."""


class InputError(LieonError):
    """Malformed external input (JSON, CLI arguments)."""
