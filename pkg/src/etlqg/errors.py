"""Exception types shared across the package."""


class EtlqgError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(EtlqgError):
    """Matrix or vector shapes are inconsistent with each other."""


class InvalidPlant(EtlqgError):
    """Plant fails one or more of the standing synthesis assumptions.

    Carries the list of human-readable violation tags in ``violations``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NoStabilizingSolution(EtlqgError):
    """Riccati equation has no stabilizing solution for the given data."""


class NotHurwitz(EtlqgError):
    """A matrix required to be Hurwitz has an eigenvalue with Re >= 0."""


class NotPositiveDefinite(EtlqgError):
    """A matrix required to be symmetric positive definite is not."""


class DomainError(EtlqgError):
    """Scalar argument outside the mathematical domain of the function."""


class NotStationary(EtlqgError):
    """Fixed-point iteration exhausted max_steps before reaching tolerance."""


class OmegaTouchesBoundary(EtlqgError):
    """Continuation region reached the edge of the grid; domain too small."""


class EmptyOmega(EtlqgError):
    """Value function has no strictly negative nodes; nothing to extract."""


class NonFiniteValue(EtlqgError):
    """PDE iteration produced NaN or infinity."""


class NonFiniteState(EtlqgError):
    """Simulated state trajectory overflowed or became NaN."""


class ConfigError(EtlqgError):
    """Run configuration file is missing, malformed, or inconsistent."""
