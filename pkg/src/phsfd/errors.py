"""Exception types raised across the package."""


class PhsfdError(Exception):
    """Base class for all package errors."""


class InvalidSpacingError(PhsfdError):
    """Requested internodal distance is outside (0, 2)."""


class InsufficientNodesError(PhsfdError):
    """A stencil of size n was requested from fewer than n nodes."""


class DegenerateStencilError(PhsfdError):
    """The local weight system for a stencil is singular or near-singular."""

    def __init__(self, center: int, rcond: float):
        self.center = int(center)
        self.rcond = float(rcond)
        super().__init__(
            f"degenerate stencil at node {self.center}: "
            f"local system reciprocal condition estimate {self.rcond:.3e}"
        )


class AssemblyError(PhsfdError):
    """Stencils and weight rows passed to assembly are inconsistent."""


class ConvergenceError(PhsfdError):
    """The iterative solver failed to reach the requested tolerance."""


class SlopeFitError(PhsfdError):
    """Slope estimation received fewer than two points or nonpositive values."""


class ConfigError(PhsfdError):
    """An experiment configuration value is invalid; names the offending flag."""
