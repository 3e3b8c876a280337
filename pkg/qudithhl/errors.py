"""Exception classes raised across qudithhl.

All of them derive from ``ValueError`` or ``RuntimeError`` so that callers
that only care about "bad input" vs "something broke" can keep catching the
builtin classes.
"""


class DomainError(ValueError):
    """Invalid mathematical input (out-of-range index, zero vector,
    non-Hermitian or non-positive-definite matrix, shape mismatch)."""


class ConfigurationError(ValueError):
    """Inconsistent wiring, arity, dimension or configuration values."""


class InversionConstantError(ConfigurationError):
    """The inversion constant exceeds a populated grid eigenvalue."""


class PostSelectionError(DomainError):
    """Post-selection on an outcome that has zero probability."""


class IngestionError(ValueError):
    """A file was read but its content is rejected."""


class ParseError(IngestionError):
    """A file could not be parsed.

    Parameters
    ----------
    path : str
        The file being parsed.
    line : int
        1-based line number where parsing failed, 0 if not line-specific.
    message : str
        What went wrong.
    """

    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        location = f"{path}:{line}" if line else f"{path}"
        super().__init__(f"{location}: {message}")


class InternalConsistencyError(RuntimeError):
    """A cross-check that must hold by construction failed."""
