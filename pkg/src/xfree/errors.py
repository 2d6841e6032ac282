"""Shared exception types."""


class PatternError(ValueError):
    """Malformed pattern file or invalid pattern data."""


class PreconditionError(ValueError):
    """A stated precondition of an operation does not hold for the inputs."""


class BudgetExceededError(RuntimeError):
    """A configured cap (vertices, edges, search nodes, samples) was exceeded."""
