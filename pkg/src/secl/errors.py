"""Exception types shared across the package."""


class SeclError(Exception):
    """Base class for all package-specific errors."""


class ParseError(SeclError):
    """A data file could not be parsed; message carries the file and line number."""


class IndexErrorSecl(SeclError):
    """An edge endpoint lies outside [0, N)."""


class ShapeError(SeclError):
    """Two operands have incompatible shapes; message names the op and both shapes."""


class ConfigError(SeclError):
    """An invalid configuration value."""


class NumericError(SeclError):
    """A non-finite value appeared where the contract requires finiteness."""


class DegenerateGraphError(SeclError):
    """The graph has no edges, so degree-normalized quantities are undefined."""
