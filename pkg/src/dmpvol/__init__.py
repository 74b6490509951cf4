"""Dynamic movement primitives with reactive obstacle avoidance.

The main entry points are re-exported here; see the submodules for the
full API.
"""

from .avoidance import (
    DynamicPoint,
    DynamicVolume,
    StaticPoint,
    StaticVolume,
    SteeringAngle,
    compose_field,
    perturbation,
    potential,
)
from .basis import BasisSet, eval_basis, forcing_value, make_basis
from .dmp import Dmp, Trajectory, learn_from_demo, rollout
from .errors import (
    CollisionError,
    ConfigError,
    DegenerateNormalizationError,
    DivergenceError,
    DmpError,
    InsideObstacleError,
    NumericalError,
    SingularityError,
)
from .metrics import ComparisonReport, compare
from .obstacles import PointObstacle, Superquadric, discretize_boundary, isopotential
from .phase import CanonicalSystem, phase_at

__all__ = [
    "BasisSet", "CanonicalSystem", "CollisionError", "ComparisonReport", "ConfigError",
    "DegenerateNormalizationError", "DivergenceError", "Dmp", "DmpError", "DynamicPoint",
    "DynamicVolume", "InsideObstacleError", "NumericalError", "PointObstacle",
    "SingularityError", "StaticPoint", "StaticVolume", "SteeringAngle", "Superquadric",
    "Trajectory", "compare", "compose_field", "discretize_boundary", "eval_basis",
    "forcing_value", "isopotential", "learn_from_demo", "make_basis", "perturbation",
    "phase_at", "potential", "rollout",
]
