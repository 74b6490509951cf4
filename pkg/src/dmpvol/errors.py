"""Exception hierarchy.

Numerical failures (divergence, obstacle penetration, singular geometry)
derive from :class:`NumericalError` so the command line can map them to a
single exit code.
"""


class DmpError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(DmpError, ArithmeticError):
    pass


class DegenerateNormalizationError(NumericalError):
    """The basis activations summed to (numerically) zero."""


class DivergenceError(NumericalError):
    """A rollout left the configured state bound."""


class SingularityError(NumericalError):
    """A potential was evaluated at a singular point."""


class InsideObstacleError(NumericalError):
    """A volumetric potential was evaluated on or inside an obstacle."""


class CollisionError(InsideObstacleError):
    """Two robots interpenetrated during a multi-robot simulation."""


class ConfigError(DmpError, ValueError):
    """Invalid experiment configuration or input file."""
