"""Exception types shared across the package."""


class CascadeNetError(Exception):
    """Base class for all package errors."""


class ParameterError(CascadeNetError, ValueError):
    """A generator, threshold or attack parameter is out of range."""


class DomainError(CascadeNetError, ValueError):
    """An operation is undefined for its input (e.g. conductance of V)."""


class FormatError(CascadeNetError, ValueError):
    """A netgraph file could not be parsed."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class SpecError(CascadeNetError, ValueError):
    """An experiment spec file is malformed or names an unknown key."""

    def __init__(self, message, lineno=None, key=None):
        self.lineno = lineno
        self.key = key
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)


class NoPathError(CascadeNetError):
    """Navigation found no route between two nodes."""
