"""Exception types shared across the package.

Exit-code mapping used by the CLI: ScenarioError -> 1,
EigenConvergenceError / ConsistencyError -> 2, TermCapExceeded -> 3.
"""


class FkdetError(Exception):
    """Base class for all package-specific errors."""


class SpaceMismatchError(FkdetError):
    """Two values built over different discretizations were combined."""


class DivisionByZeroCellError(FkdetError):
    """Cellwise division hit a (numerically) zero divisor cell."""

    def __init__(self, cell: int):
        super().__init__(f"division by zero at cell {cell}")
        self.cell = cell


class TableError(FkdetError):
    """A table of (source, target) pairs does not define a partial injection."""


class UnknownGeneratorError(FkdetError):
    """A word or operator term references a generator name not in the family."""


class TermCapExceededError(FkdetError):
    """Normal-form expansion or word enumeration exceeded its hard cap."""


class NonHermitianError(FkdetError):
    """Matrix handed to the Hermitian eigensolver is not Hermitian within tolerance."""


class EigenConvergenceError(FkdetError):
    """The Jacobi eigensolver did not converge within the sweep budget."""


class ConsistencyError(FkdetError):
    """Two independent computation paths disagreed beyond tolerance."""


class ScenarioError(FkdetError):
    """A scenario document is malformed or references unknown names."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")
