"""Exception types shared across the package."""


class SatFilterError(Exception):
    """Base class for all package errors."""


class DimensionError(SatFilterError, ValueError):
    """Invalid problem dimensions (n = 0, k > n, k = 0, width mismatch)."""


class DimacsParseError(SatFilterError, ValueError):
    """Malformed DIMACS input. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(SatFilterError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class SizeCapError(SatFilterError, ValueError):
    """An enumeration was requested past its configured size cap."""


class ClauseSpaceTooLarge(SizeCapError):
    """Exact clause-space enumeration exceeds the cap; sample instead."""


class NonSatisfyingSolutionError(SatFilterError, ValueError):
    """A candidate filter solution fails its instance. Carries the index."""

    def __init__(self, index: int, energy: int):
        self.index = index
        self.energy = energy
        super().__init__(
            f"solution {index} does not satisfy the instance (energy {energy})"
        )


class DuplicateSolutionError(SatFilterError, ValueError):
    """The same assignment appears twice in a filter's solution list."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"solution {index} duplicates an earlier one")


class ScheduleError(SatFilterError, ValueError):
    """Invalid solver schedule parameters."""


class ScheduleMismatchError(SatFilterError, ValueError):
    """A schedule was paired with the wrong solver."""


class CensusError(SatFilterError, ValueError):
    """A solution census is malformed, unvalidated, or empty."""


class ExternalSolverError(SatFilterError, RuntimeError):
    """Base for failures of an external solver binary."""


class ExternalProcessError(ExternalSolverError):
    """The external solver process failed to run or exited abnormally."""


class ExternalOutputError(ExternalSolverError):
    """The external solver's output could not be parsed."""


class ExternalValidationError(ExternalSolverError):
    """The external solver returned a non-satisfying assignment."""
