"""Exception hierarchy."""


class PurificationError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(PurificationError, ValueError):
    pass


class IndexOutOfRange(PurificationError, IndexError):
    pass


class NonHermitianInput(PurificationError, ValueError):
    pass


class DefectiveMatrix(PurificationError, ArithmeticError):
    """The eigenvector matrix is numerically singular (no complete eigenbasis)."""


class InvalidParams(PurificationError, ValueError):
    pass


class DegenerateDirection(PurificationError, ArithmeticError):
    """|c| = 0 in the two-qubit closed form, where the eigenvector formulas are singular."""


class YieldUnderflow(PurificationError, ArithmeticError):
    """The success probability dropped below the representable floor."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class DegenerateLeading(PurificationError, ArithmeticError):
    """Leading eigenvalues are degenerate in magnitude, so no purification occurs."""


class NoConvergence(PurificationError, ArithmeticError):
    pass


class GridTooLarge(PurificationError, ValueError):
    pass


class NonFiniteObjective(PurificationError, ValueError):
    pass


class NoSolutionInRange(PurificationError, LookupError):
    pass


class ScenarioError(PurificationError, ValueError):
    """Malformed or invalid scenario file."""
