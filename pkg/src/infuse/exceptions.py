"""Exception types shared across the package."""


class ParseError(ValueError):
    """A token or line that cannot be parsed (names its location)."""


class SchemaError(ValueError):
    """A structural mismatch: wrong field count, misaligned containers."""


class ShapeError(ValueError):
    """Matrix dimensions disagree with a model or with each other."""


class DomainError(ValueError):
    """An input outside an operation's domain (empty sample, rank too low)."""


class TrainingError(RuntimeError):
    """A model fit that cannot proceed or diverged."""


class ConfigError(ValueError):
    """An invalid experiment configuration value or key."""


class ContainerError(ValueError):
    """A malformed or wrong-typed binary container file."""
