"""Exception types shared across the package."""


class AdiascaleError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(AdiascaleError):
    """Invalid configuration or input file."""


class PathFileError(ConfigError):
    """Malformed path-definition file."""


class NumericalError(AdiascaleError):
    """A numerical procedure failed to meet its contract."""


class DegenerateSpectrumError(NumericalError):
    """An operation that requires a non-degenerate spectrum hit a (near-)degeneracy."""

    def __init__(self, gap, message=None):
        self.gap = gap
        super().__init__(message or f"near-degenerate spectrum: gap {gap:.3e}")


class ConvergenceError(NumericalError):
    """An iterative procedure exhausted its budget without converging."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
