"""Exceptions shared across the package.

``ValueError`` is raised for caller mistakes (bad shapes, bad arguments);
the classes below mark data-dependent failures that can legitimately occur
inside a study replicate and are therefore eligible for the replicate
retry policy.
"""


class FitError(RuntimeError):
    """A model could not be fitted on the data it was given."""


class DivergenceError(FitError):
    """Training produced a non-finite loss.

    Attributes
    ----------
    epoch : int
        Zero-based epoch index at which the loss stopped being finite.
    """

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"non-finite training loss at epoch {epoch}")


class ConfigError(ValueError):
    """Invalid study configuration; names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
