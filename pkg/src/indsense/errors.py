"""Exception types raised across the toolkit."""


class ParameterError(ValueError):
    """A spec or argument violates one of its invariants."""


class SingularConfigurationError(ValueError):
    """Two filaments overlap closer than the regularization radius."""


class OverdampedError(ValueError):
    """The RLC tank has no real resonant frequency."""


class SolverError(RuntimeError):
    """The coupled-circuit system could not be solved."""

    def __init__(self, message, angle=None, condition=None):
        super().__init__(message)
        self.angle = angle
        self.condition = condition


class InsufficientDataError(ValueError):
    """Too few or degenerate samples for a fit."""


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. all-zero frames)."""


class UndefinedAngleError(ValueError):
    """atan2 requested at the origin."""


class TrackingLossError(ValueError):
    """Sector tracking lost because a step exceeded the uniqueness range."""


class AnalysisError(ValueError):
    """Error curve or spectrum request is malformed."""


class ConfigError(ValueError):
    """Project configuration failed validation."""
