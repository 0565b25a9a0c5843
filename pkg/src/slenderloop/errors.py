"""Exception hierarchy shared by the compute modules and the CLI."""


class SlenderLoopError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class DomainError(SlenderLoopError, ValueError):
    """Argument outside the domain of a mathematical function."""


class ConfigurationError(SlenderLoopError, ValueError):
    """Invalid grid, resolution, or run configuration."""

    exit_code = 2


class GeometryError(SlenderLoopError, ValueError):
    """Curve does not satisfy a geometric precondition."""


class NumericalError(SlenderLoopError, RuntimeError):
    """A numerical procedure failed (singular system, NaN, divergence)."""


class OracleError(SlenderLoopError, RuntimeError):
    """A reference computation did not converge."""
