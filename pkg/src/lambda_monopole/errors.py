"""Exception hierarchy shared by the computational modules and the CLI."""


class MonopoleError(Exception):
    """Base class for every error raised by this package."""


class PhysicsDomainError(MonopoleError):
    """A request falls outside the region where the physics model applies."""


class DegeneratePoint(PhysicsDomainError):
    """The dark/bright gap closes, so the adiabatic reduction breaks down."""


class PatchBoundary(PhysicsDomainError):
    """A point or finite-difference stencil leaves the requested gauge patch."""


class OnAxisSingular(PhysicsDomainError):
    """The requested patch connection is singular on the z axis at this point."""


class DomainError(PhysicsDomainError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class InvalidQuantum(MonopoleError, ValueError):
    """A set of (half-)integer quantum numbers is not admissible."""


class UnsupportedDetuning(PhysicsDomainError):
    """The adiabatic criterion is only available for zero one-photon detuning."""


class NoThreshold(PhysicsDomainError):
    """The adiabaticity ratio never crosses the requested criterion."""


class NumericalError(MonopoleError):
    """Base class for numerical failures."""


class NonConverged(NumericalError):
    """An iterative solver did not reach its residual tolerance."""


class GridTooCoarse(NumericalError):
    """Grid-refinement comparison exceeds the requested tolerance."""


class ConfigError(MonopoleError):
    """A run configuration failed validation."""
