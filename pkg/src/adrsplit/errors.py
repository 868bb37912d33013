"""Exception hierarchy shared by all adrsplit modules."""


class AdrSplitError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(AdrSplitError):
    """Vector or block dimensions do not match."""


class ParameterError(AdrSplitError):
    """A scalar parameter is outside its admissible range."""


class InvalidSubspaceError(AdrSplitError):
    """The scaled-diagonal subspace is degenerate (all scale factors zero)."""


class UnsupportedEvalError(AdrSplitError):
    """Direct evaluation requested on a set-valued operator."""


class UnsupportedOperatorError(AdrSplitError):
    """The operator kind (or combination of kinds) has no closed form here."""


class RegimeError(AdrSplitError):
    """A resolvent or relaxation precondition on the moduli is violated."""


class ValidationError(AdrSplitError):
    """Parameter validation failed; carries the names of failed conditions."""

    def __init__(self, message: str, failed: list[str] | None = None):
        super().__init__(message)
        self.failed = failed or []


class UsageError(AdrSplitError):
    """A checker or command was invoked without required inputs."""


class ConfigError(AdrSplitError):
    """A configuration file is malformed or violates the schema."""
