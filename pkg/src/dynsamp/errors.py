"""Exception hierarchy.

Three families map onto the CLI exit codes: :class:`InputError` (bad data or
violated preconditions, exit 2), :class:`NumericalFailure` (exit 3) and
:class:`InvariantViolation` (exit 4).
"""

from __future__ import annotations


class DynSampError(Exception):
    """Base class for every error raised by this package."""


class InputError(DynSampError, ValueError):
    pass


class PoleAtMinusOne(InputError):
    pass


class DomainViolation(InputError):
    """A point lies outside the open disc / open right half-plane."""


class BoundaryEigenvalue(DomainViolation):
    """An eigenvalue sits on or outside the boundary, so the orbit is not Bessel."""


class DimensionMismatch(InputError):
    pass


class DeadCoordinate(InputError):
    def __init__(self, index: int):
        super().__init__(f"column {index} of the vector table is identically zero")
        self.index = index


class DuplicatePoint(InputError):
    pass


class ClusterTooLarge(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class ValidationError(InputError):
    def __init__(self, message: str, invariant: str, field: str | None = None):
        prefix = f"{field}: " if field else ""
        super().__init__(f"{prefix}{message} [invariant: {invariant}]")
        self.invariant = invariant
        self.field = field


class NumericalFailure(DynSampError, ArithmeticError):
    pass


class EigenSolveFailure(NumericalFailure):
    pass


class SingularBasis(NumericalFailure):
    pass


class TailNotBounded(NumericalFailure):
    pass


class NoFeasibleDelta(NumericalFailure):
    pass


class InfeasibleStability(NumericalFailure):
    pass


class NotAFrame(NumericalFailure):
    pass


class InvariantViolation(DynSampError, AssertionError):
    pass


def error_family(exc: BaseException) -> str:
    """``"input"``, ``"numerical"`` or ``"invariant"``; anything unexpected counts as invariant."""
    if isinstance(exc, InputError):
        return "input"
    if isinstance(exc, NumericalFailure):
        return "numerical"
    return "invariant"
