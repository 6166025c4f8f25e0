"""Exception types shared across the package."""


class GwFairError(Exception):
    """Base class for every error this package raises on purpose."""


class EmptyProblemError(GwFairError):
    """An allocation problem was posed with no contending sessions."""


class SemanticError(GwFairError):
    """Structurally valid input that violates a semantic rule."""


class InfeasibleError(SemanticError):
    """Guaranteed minimum rates exceed the available capacity.

    ``deficit`` is how many Mbps the guarantees overshoot capacity by.
    """

    def __init__(self, message: str, deficit: float = 0.0):
        super().__init__(message)
        self.deficit = deficit


class PolicyMismatchError(GwFairError):
    """A weight policy was applied to sessions it cannot describe."""


class ConfigError(GwFairError):
    """Bad experiment setup: unknown name, missing piece, bad option."""


class ParseError(GwFairError):
    """Config file could not be parsed.  Carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyTraceError(GwFairError):
    """A trace query was made over a window containing no samples."""
