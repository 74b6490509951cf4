"""Learning a DMP from one demonstration and integrating it.

The transformation system is

    tau * dv/dt = K (g - x) - D v - K (g - x0) s + K f(s) + phi(x, xdot, t)
    tau * dx/dt = v

with the phase ``s`` taken in closed form from :mod:`dmpvol.phase`.
"""

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .basis import BasisSet, forcing_value, make_basis, normalized_features
from .errors import DivergenceError
from .phase import DEFAULT_ALPHA, CanonicalSystem

# A perturbation field maps (position, world-time velocity, time) to an
# acceleration-like term added to the right-hand side of the velocity
# equation.
PerturbationField = Callable[[np.ndarray, np.ndarray, float], np.ndarray]

DEFAULT_DT = 1e-3
DEFAULT_BOUND = 1e6


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped samples of positions, velocities and accelerations.

    All arrays are in world time: ``velocities`` is dx/dt and
    ``accelerations`` is d2x/dt2. Arrays have shape ``(M, d)``.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray

    def __post_init__(self):
        t = _frozen(self.times)
        x = _frozen(self.positions)
        v = _frozen(self.velocities)
        a = _frozen(self.accelerations)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("a trajectory needs at least two samples")
        if x.ndim == 1:
            x, v, a = (_frozen(arr.reshape(-1, 1)) for arr in (x, v, a))
        for name, arr in (("positions", x), ("velocities", v), ("accelerations", a)):
            if arr.ndim != 2 or arr.shape[0] != t.size:
                raise ValueError(f"{name} must have shape (M, d) with M = {t.size}")
        if not (x.shape == v.shape == a.shape):
            raise ValueError("positions, velocities and accelerations disagree on d")
        if t[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time stamps must be strictly increasing")
        for name, arr in (("times", t), ("positions", x), ("velocities", v), ("accelerations", a)):
            object.__setattr__(self, name, arr)

    @classmethod
    def from_positions(cls, times, positions):
        """Fill velocities and accelerations by finite differences.

        Central differences inside, one-sided (second order) at the ends;
        non-uniform time stamps are handled.
        """
        t = np.asarray(times, dtype=float)
        x = np.asarray(positions, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if t.size < 3:
            raise ValueError("finite differences need at least three samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time stamps must be strictly increasing")
        v = np.gradient(x, t, axis=0, edge_order=2)
        a = np.gradient(v, t, axis=0, edge_order=2)
        return cls(t, x, v, a)

    @property
    def dims(self):
        return self.positions.shape[1]

    @property
    def duration(self):
        return float(self.times[-1])

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("times", "positions", "velocities", "accelerations")
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Dmp:
    """A learned movement primitive.

    ``weights`` has one row of ``basis.count`` values per dimension.
    ``x0`` and ``goal`` are the demonstration endpoints, used as rollout
    defaults.
    """

    elastic: np.ndarray
    damping: np.ndarray
    tau: float
    alpha: float
    basis: BasisSet
    weights: np.ndarray
    demo_duration: float
    x0: np.ndarray
    goal: np.ndarray

    def __post_init__(self):
        k = _frozen(np.atleast_1d(self.elastic))
        d = _frozen(np.atleast_1d(self.damping))
        w = _frozen(np.atleast_2d(self.weights))
        x0 = _frozen(np.atleast_1d(self.x0))
        g = _frozen(np.atleast_1d(self.goal))
        dims = k.size
        if not (d.size == x0.size == g.size == w.shape[0] == dims):
            raise ValueError("gains, endpoints and weights disagree on dimension")
        if w.shape[1] != self.basis.count:
            raise ValueError("weights must have one column per basis function")
        if not np.all(k > 0):
            raise ValueError("elastic gains must be positive")
        if not np.all(d > 0):
            raise ValueError("damping gains must be positive")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if not (self.tau > 0 and self.alpha > 0 and self.demo_duration > 0):
            raise ValueError("tau, alpha and demo_duration must be positive")
        for name, arr in (("elastic", k), ("damping", d), ("weights", w), ("x0", x0), ("goal", g)):
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "demo_duration", float(self.demo_duration))

    @property
    def dims(self):
        return self.elastic.size

    @property
    def canonical(self):
        return CanonicalSystem(self.alpha, self.tau)

    def with_tau(self, tau):
        return replace(self, tau=tau)

    def forcing(self, s):
        """Forcing vector(s) at phase(s) ``s``."""
        return forcing_value(self.basis, self.weights, s)

    @classmethod
    def zero(cls, x0, goal, elastic, damping=None, tau=1.0, alpha=DEFAULT_ALPHA, n_basis=50):
        """Primitive with null forcing: a critically damped reach."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        elastic = np.broadcast_to(np.asarray(elastic, dtype=float), x0.shape)
        if damping is None:
            damping = 2.0 * np.sqrt(elastic)
        damping = np.broadcast_to(np.asarray(damping, dtype=float), x0.shape)
        basis = make_basis(n_basis, alpha, tau, tau)
        return cls(elastic, damping, tau, alpha, basis,
                   np.zeros((x0.size, basis.count)), tau, x0, goal)


def critical_damping(elastic):
    return 2.0 * np.sqrt(np.asarray(elastic, dtype=float))


def desired_forcing(demo: Trajectory, elastic, damping, alpha):
    """Forcing values that make the demonstration an exact solution.

    Returns ``(phases, forcing)`` with forcing of shape ``(M, d)``.
    """
    tau = demo.duration
    x = demo.positions
    x0, g = x[0], x[-1]
    s = CanonicalSystem(alpha, tau).phase_at(demo.times)
    v = tau * demo.velocities
    vdot = tau * demo.accelerations
    f = (tau * vdot + damping * v) / elastic - (g - x) + np.outer(s, g - x0)
    return s, f


def learn_from_demo(demo: Trajectory, elastic, alpha=DEFAULT_ALPHA, n_basis=50,
                    regularization=None, damping=None):
    """Fit forcing weights to one demonstration.

    Parameters
    ----------
    demo : Trajectory
        Demonstration with at least three samples.
    elastic : float or array_like
        Diagonal of the stiffness matrix ``K``; a scalar is broadcast.
    alpha : float
        Phase decay gain.
    n_basis : int
        Number of basis intervals ``N``; ``N + 1`` kernels are used.
    regularization : float, optional
        Ridge penalty; defaults to ``1e-10 * M`` for ``M`` samples.
    damping : float or array_like, optional
        Diagonal of ``D``; defaults to critical damping ``2 sqrt(K)``.

    Returns
    -------
    Dmp
        ``tau`` equals the demo duration, endpoints are the demo's first
        and last positions.
    """
    if len(demo) < 3:
        raise ValueError("learning needs at least three demonstration samples")
    if not demo.duration > 0:
        raise ValueError("demonstration has zero duration")
    dims = demo.dims
    elastic = np.broadcast_to(np.asarray(elastic, dtype=float), (dims,)).copy()
    if damping is None:
        damping = critical_damping(elastic)
    damping = np.broadcast_to(np.asarray(damping, dtype=float), (dims,)).copy()
    if not np.all(elastic > 0) or not np.all(damping > 0):
        raise ValueError("gains must be positive")
    m = len(demo)
    if regularization is None:
        regularization = 1e-10 * m
    if regularization < 0:
        raise ValueError("regularization must be nonnegative")

    tau = demo.duration
    basis = make_basis(n_basis, alpha, tau, tau)
    s, f_target = desired_forcing(demo, elastic, damping, alpha)
    phi = normalized_features(basis, s)
    gram = phi.T @ phi + regularization * np.eye(basis.count)
    weights = np.linalg.solve(gram, phi.T @ f_target).T
    return Dmp(elastic, damping, tau, alpha, basis, weights, tau,
               demo.positions[0], demo.positions[-1])


def rollout(dmp: Dmp, x0=None, goal=None, dt=DEFAULT_DT, horizon=None,
            field: Optional[PerturbationField] = None, bound=DEFAULT_BOUND):
    """Integrate the primitive with explicit Euler from rest.

    ``horizon`` defaults to ``tau``. The field, if any, is called with the
    position, the world-time velocity ``v / tau`` and the time, and its
    output is added to the right-hand side of the velocity equation.
    Samples record the state and the acceleration ``dv/dt / tau`` computed
    from it, before the step is taken.
    """
    x0 = dmp.x0 if x0 is None else np.asarray(x0, dtype=float)
    goal = dmp.goal if goal is None else np.asarray(goal, dtype=float)
    if horizon is None:
        horizon = dmp.tau
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not horizon >= dt:
        raise ValueError("horizon must be at least one step")
    if x0.shape != (dmp.dims,) or goal.shape != (dmp.dims,):
        raise ValueError(f"start and goal must have {dmp.dims} components")

    stepper = _Stepper(dmp, x0, goal, dt, horizon)
    x = x0.copy()
    v = np.zeros(dmp.dims)
    for k in range(stepper.steps + 1):
        phi = None if field is None else field(x, v / dmp.tau, stepper.times[k])
        x, v = stepper.advance(k, x, v, phi)
        if k < stepper.steps:
            _check_bound(x, bound, stepper.times[k + 1])
    return stepper.trajectory()


def _check_bound(x, bound, t):
    if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > bound:
        raise DivergenceError(f"state left the bound {bound:g} at t = {t:.6g}: x = {x}")


class _Stepper:
    """Shared Euler recurrence for single rollouts and multi-robot scenes.

    Keeping one implementation guarantees that a scene without coupling
    reproduces independent rollouts bit for bit.
    """

    def __init__(self, dmp, x0, goal, dt, horizon):
        self.dmp = dmp
        self.x0 = x0
        self.goal = goal
        self.dt = float(dt)
        self.steps = int(round(horizon / dt))
        self.times = np.arange(self.steps + 1) * self.dt
        self.phases = dmp.canonical.phase_at(self.times)
        # Forcing depends on time only, so evaluate it once for the grid.
        self.kforce = dmp.elastic * dmp.forcing(self.phases)
        self.kshift = dmp.elastic * (goal - x0)
        self.x_hist = np.empty((self.steps + 1, dmp.dims))
        self.v_hist = np.empty_like(self.x_hist)
        self.a_hist = np.empty_like(self.x_hist)

    def advance(self, k, x, v, phi):
        dmp = self.dmp
        rhs = (dmp.elastic * (self.goal - x) - dmp.damping * v
               - self.kshift * self.phases[k] + self.kforce[k])
        if phi is not None:
            rhs = rhs + phi
        tau = dmp.tau
        self.x_hist[k] = x
        self.v_hist[k] = v / tau
        self.a_hist[k] = rhs / (tau * tau)
        if k == self.steps:
            return x, v
        return x + self.dt * (v / tau), v + self.dt * (rhs / tau)

    def trajectory(self):
        return Trajectory(self.times, self.x_hist, self.v_hist, self.a_hist)
