"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class MKPError(Exception):
    """Base class for all library errors."""


class ValidationError(MKPError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class DimensionError(MKPError, ValueError):
    """A grid axis is too short for the requested stencil."""


class BranchMismatchError(ValidationError):
    """Potential branch (CLL vs KN) does not match the requested operation."""


class BoundaryPointError(MKPError, IndexError):
    """A pointwise evaluation was requested inside the excluded boundary margin."""


class DegeneracyError(MKPError, ArithmeticError):
    """Numerical degeneracy (CLI exit code 3).

    ``point`` is the first failing location, either a grid index triple
    ``(ix, iy, it)`` or physical coordinates ``(x, y, t)``.
    """

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at {tuple(point)}"
        super().__init__(message)
        self.point = point


class DegenerateSeedError(DegeneracyError):
    """Eigenfunction matrix or block-split diagonal block is singular."""


class SingularPointError(DegeneracyError):
    """A closed-form denominator vanishes."""
