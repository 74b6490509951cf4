"""Comparison of an adapted trajectory against the obstacle-free one."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dmp import Trajectory
from .obstacles import PointObstacle, Superquadric, isopotential


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Deviation and smoothness of an adapted trajectory.

    ``min_clearance`` is the smallest isopotential value over time and
    superquadric obstacles, or the smallest distance for point obstacles;
    it is ``None`` when there are no obstacles.
    """

    deviation_series: np.ndarray
    accel_norm_series: np.ndarray
    max_deviation: float
    max_accel_norm: float
    final_goal_error: float
    min_clearance: Optional[float]
    collided: bool

    def to_dict(self, series=False):
        out = {
            "max_deviation": self.max_deviation,
            "max_accel_norm": self.max_accel_norm,
            "final_goal_error": self.final_goal_error,
            "min_clearance": self.min_clearance,
            "collided": self.collided,
        }
        if series:
            out["deviation_series"] = self.deviation_series.tolist()
            out["accel_norm_series"] = self.accel_norm_series.tolist()
        return out


def resample(traj: Trajectory, times):
    """Positions and accelerations linearly interpolated at ``times``."""
    pos = np.column_stack([np.interp(times, traj.times, traj.positions[:, i])
                           for i in range(traj.dims)])
    acc = np.column_stack([np.interp(times, traj.times, traj.accelerations[:, i])
                           for i in range(traj.dims)])
    return pos, acc


def clearance(positions, obstacles):
    """Smallest clearance of ``positions`` to any obstacle, or None."""
    best = None
    for obs in obstacles:
        if isinstance(obs, Superquadric):
            val = float(np.min(isopotential(obs, positions)))
        elif isinstance(obs, PointObstacle):
            val = float(np.min(np.linalg.norm(positions - obs.position, axis=1)))
        else:
            raise TypeError(f"unsupported obstacle {obs!r}")
        best = val if best is None else min(best, val)
    return best


def compare(reference: Trajectory, adapted: Trajectory, obstacles=(), goal=None):
    """Compare ``adapted`` with ``reference`` on the reference time grid.

    Parameters
    ----------
    reference, adapted : Trajectory
        Same dimension; grids may differ. Reference samples outside the
        adapted time range use the adapted end values.
    obstacles : sequence
        Superquadrics and/or point obstacles used for clearance, which is
        measured on the raw adapted samples.
    goal : array_like, optional
        Goal for the final error; the reference's last position by default.
    """
    if reference.dims != adapted.dims:
        raise ValueError("trajectories differ in dimension")
    if adapted.times[-1] < reference.times[0] or reference.times[-1] < adapted.times[0]:
        raise ValueError("trajectories have non-overlapping time ranges")
    pos, acc = resample(adapted, reference.times)
    deviation = np.linalg.norm(reference.positions - pos, axis=1)
    accel = np.linalg.norm(acc, axis=1)
    goal = reference.positions[-1] if goal is None else np.asarray(goal, dtype=float)
    min_c = clearance(adapted.positions, obstacles)
    return ComparisonReport(
        deviation_series=deviation,
        accel_norm_series=accel,
        max_deviation=float(np.max(deviation)),
        max_accel_norm=float(np.max(accel)),
        final_goal_error=float(np.linalg.norm(adapted.positions[-1] - goal)),
        min_clearance=min_c,
        collided=min_c is not None and min_c <= 0,
    )
