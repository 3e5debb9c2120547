"""Exception hierarchy shared by all modules."""


class DvlabError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(DvlabError):
    """A constructor or builder received an out-of-contract argument."""


class DimensionMismatch(DvlabError):
    """Vector or matrix shapes do not agree."""


class NotIrreducible(DvlabError):
    """The digraph of strictly positive rates is not strongly connected."""


class SolverFailure(DvlabError):
    """A linear-algebra subproblem degenerated (singular system, bad null space)."""


class EigenFailure(DvlabError):
    """An eigensolve did not produce the expected structure."""


class NonPositiveDistribution(DvlabError):
    """An operation requiring a strictly positive distribution got one with
    a component below the positivity floor."""


class ConvergenceFailure(DvlabError):
    """An iterative solver exhausted its iteration budget."""


class NonZeroMean(DvlabError):
    """An observable required to have zero stationary mean does not."""


class NotDetailedBalance(DvlabError):
    """The model does not satisfy detailed balance, or carries no
    equilibrium potential."""


class SupportViolation(DvlabError):
    """A distribution puts mass where the reference law has none."""


class IntegratorFailure(DvlabError):
    """The evolution driver produced an invalid distribution."""


class InsufficientTrace(DvlabError):
    """A trace is too short for the requested scan."""


class DegenerateSample(DvlabError):
    """A Monte Carlo estimate is dominated by too few trajectories."""


class ParseError(DvlabError):
    """Malformed model or distribution document."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DvlabError):
    """A parsed document violates a semantic invariant."""
