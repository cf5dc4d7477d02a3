"""Exception types shared across the package."""


class HaloReachError(Exception):
    """Base class for every error raised by this package."""


class SingularityError(HaloReachError):
    """State fell inside the configured exclusion radius of a primary."""


class PropagationError(HaloReachError):
    """Integration failed: step-size underflow or step budget exhausted."""


class IllConditionedBvpError(HaloReachError):
    """The final-state/initial-costate block is numerically singular."""


class ShootingError(HaloReachError):
    """Newton shooting failed to converge."""


class ConfigError(HaloReachError):
    """Invalid run configuration, flag combination, or catalog input."""
