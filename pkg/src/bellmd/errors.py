"""Exception hierarchy shared by all modules."""


class BellMDError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BellMDError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class RangeError(BellMDError, ValueError):
    """Measurement-dependence parameters violate their admissible ranges."""


class UnsupportedFunctional(BellMDError, ValueError):
    """The operation only knows closed forms for chain3 and the pfb family."""


class DimensionError(BellMDError, ValueError):
    """Malformed linear program."""


class SolverError(BellMDError, RuntimeError):
    """The simplex solver failed to terminate normally."""


class InfeasibleParams(BellMDError):
    """The oracle program has no feasible point for the given parameters."""


class InfeasibleStrategy(BellMDError):
    """An explicit strategy cannot be completed under the given constraints.

    ``constraint`` names the constraint found to be violated.
    """

    def __init__(self, message: str, constraint: str):
        super().__init__(message)
        self.constraint = constraint


class InvariantViolation(BellMDError, ValueError):
    """A hidden-variable model breaks one of its invariants."""


class EmptyCell(BellMDError, ValueError):
    """A setting pair was never observed in a trial stream."""

    def __init__(self, cell: tuple[int, int]):
        super().__init__(f"setting pair (j,k)={cell} has no trials")
        self.cell = cell


class NoSolution(BellMDError, ValueError):
    """A root or threshold does not exist on the searched interval."""
