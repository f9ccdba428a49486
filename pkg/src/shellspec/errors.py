"""Exception types shared across the package."""


class ShellSpecError(ValueError):
    """Base class for domain errors raised by this package."""


class CriticalCouplingError(ShellSpecError):
    """Coupling functions hit the critical set somewhere on the curve."""


class ConfiningCouplingError(ShellSpecError):
    """Couplings satisfy d = -4 identically, so the shell decouples."""


class NumericalFailure(ShellSpecError):
    """A numerical procedure failed to reach its tolerance."""
