"""Exception types shared across the package."""


class PocketLabError(Exception):
    pass


class InvalidGeometry(PocketLabError, ValueError):
    """Pocket or target layout violates a construction invariant."""


class AmbiguousProjection(PocketLabError):
    """Nearest boundary point is not unique at this location."""


class NotOnBoundary(PocketLabError):
    """Point is not on the requested pocket boundary."""


class DeltaTooLarge(PocketLabError, ValueError):
    """Shell half-width exceeds the limit set by gaps and inradii."""


class DomainError(PocketLabError, ValueError):
    """Argument outside the domain of a barrier function."""


class ConfigError(PocketLabError, ValueError):
    """Experiment configuration is malformed or inconsistent."""


class UnknownExperiment(ConfigError):
    """Experiment name is not one of the registered experiments."""


class TimeoutDominated(PocketLabError, RuntimeError):
    """Too many Monte Carlo paths hit the time horizon to trust estimates."""


class SingularSystem(PocketLabError, RuntimeError):
    """Discrete elliptic system has no Dirichlet anchor or failed to solve."""


class SingularCouplingMatrix(PocketLabError, RuntimeError):
    """Pocket-coupling linear system is singular or numerically unusable."""


class InsufficientStencil(PocketLabError, RuntimeError):
    """Grid too coarse to place boundary stencils between surfaces."""
