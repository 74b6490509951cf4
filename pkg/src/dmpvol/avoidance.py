"""Perturbation terms for obstacle avoidance.

Five methods, each returning the acceleration ``phi(x, v)`` added to the
velocity equation of the DMP:

=================  ==============  ==========================================
method             obstacle        term
=================  ==============  ==========================================
``StaticPoint``    point(s)        ``-grad U``, ``U = eta/2 (1/p - 1/p0)^2``
``DynamicPoint``   point(s)        ``-grad U``, ``U = lam (-cos)^beta |u| / p``
``SteeringAngle``  point(s)        ``gamma R v th exp(-beta th)``
``StaticVolume``   superquadric    ``-grad U``, ``U = A exp(-eta C) / C``
``DynamicVolume``  superquadric    ``-grad U``, ``U = lam (-cos)^beta |u| / C^eta``
=================  ==============  ==========================================

``u = v - obstacle velocity`` is the relative velocity. The dynamic
potentials vanish unless the motion approaches the obstacle.

The volumetric approach angle uses the isopotential gradient as the
obstacle normal. That is only meaningful for convex bodies: for non-convex
shapes the gradient field folds and the angle loses its meaning. Boxes
modeled with ``n = m = 2`` are still convex, so they are safe.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import obstacles as ob
from .errors import DmpError, InsideObstacleError, SingularityError
from .obstacles import PointObstacle, Superquadric

_TINY = 1e-12


def _positive(obj, *names):
    for name in names:
        val = getattr(obj, name)
        if not (np.isfinite(val) and val > 0):
            raise ValueError(f"{type(obj).__name__}.{name} must be positive, got {val}")


@dataclass(frozen=True)
class StaticPoint:
    eta: float = 1.0
    p0: float = 0.1

    kind = "static_point"

    def __post_init__(self):
        _positive(self, "eta", "p0")


@dataclass(frozen=True)
class DynamicPoint:
    lam: float = 0.2
    beta: float = 2.0

    kind = "dynamic_point"

    def __post_init__(self):
        _positive(self, "lam", "beta")
        if self.beta <= 1:
            raise ValueError("beta must exceed 1 so the term stays bounded at 90 degrees")


@dataclass(frozen=True)
class SteeringAngle:
    gamma: float = 20.0
    beta: float = 3.0

    kind = "steering_angle"

    def __post_init__(self):
        _positive(self, "gamma", "beta")


@dataclass(frozen=True)
class StaticVolume:
    amplitude: float = 10.0
    eta: float = 1.0

    kind = "static_volume"

    def __post_init__(self):
        _positive(self, "amplitude", "eta")


@dataclass(frozen=True)
class DynamicVolume:
    """Velocity-dependent superquadric potential.

    ``fd_cos_gradient`` replaces the analytic gradient of the approach
    cosine by central differences; meant for debugging new isopotentials.
    """

    lam: float = 10.0
    beta: float = 2.0
    eta: float = 0.5
    fd_cos_gradient: bool = False

    kind = "dynamic_volume"

    def __post_init__(self):
        _positive(self, "lam", "beta", "eta")
        if self.beta <= 1:
            raise ValueError("beta must exceed 1 so the term stays bounded at 90 degrees")


AvoidanceMethod = Union[StaticPoint, DynamicPoint, SteeringAngle, StaticVolume, DynamicVolume]
POINT_METHODS = (StaticPoint, DynamicPoint, SteeringAngle)
VOLUME_METHODS = (StaticVolume, DynamicVolume)
METHODS = {cls.kind: cls for cls in POINT_METHODS + VOLUME_METHODS}


# -- point obstacles ---------------------------------------------------------
#
# The ``*_many`` kernels take stacked obstacle positions and velocities of
# shape (P, d) and return the summed perturbation.

def _separation(x, positions):
    diff = np.asarray(x, dtype=float) - positions
    p = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if np.any(p < _TINY):
        raise SingularityError(f"position {x} coincides with a point obstacle")
    return diff, p


def static_point_many(x, positions, params: StaticPoint):
    diff, p = _separation(x, positions)
    near = p <= params.p0
    if not np.any(near):
        return np.zeros_like(diff[0])
    diff, p = diff[near], p[near]
    coef = params.eta * (1 / p - 1 / params.p0) / p ** 3
    return coef @ diff


def static_point_potential(x, obs: PointObstacle, params: StaticPoint):
    p = np.linalg.norm(np.asarray(x, float) - obs.position)
    if p < _TINY:
        raise SingularityError("potential evaluated on the obstacle")
    if p > params.p0:
        return 0.0
    return 0.5 * params.eta * (1 / p - 1 / params.p0) ** 2


def _point_cos(diff, p, u):
    speed = np.sqrt(np.einsum("ij,ij->i", u, u))
    moving = speed >= _TINY
    cos = np.zeros_like(p)
    cos[moving] = np.einsum("ij,ij->i", u[moving], diff[moving]) / (speed[moving] * p[moving])
    return cos, speed, moving


def dynamic_point_many(x, v, positions, velocities, params: DynamicPoint):
    diff, p = _separation(x, positions)
    u = np.asarray(v, dtype=float) - velocities
    cos, speed, moving = _point_cos(diff, p, u)
    act = moving & (cos < 0)
    if not np.any(act):
        return np.zeros_like(diff[0])
    diff, p, u, cos, speed = diff[act], p[act], u[act], cos[act], speed[act]
    grad_cos = (u / speed[:, None] - (cos / p)[:, None] * diff) / p[:, None]
    neg = -cos
    terms = (params.lam * speed * neg ** (params.beta - 1))[:, None] * (
        params.beta * grad_cos / p[:, None] + (neg / p ** 3)[:, None] * diff
    )
    return terms.sum(axis=0)


def dynamic_point_potential(x, v, obs: PointObstacle, params: DynamicPoint):
    diff = np.asarray(x, float) - obs.position
    p = np.linalg.norm(diff)
    if p < _TINY:
        raise SingularityError("potential evaluated on the obstacle")
    u = np.asarray(v, float) - obs.velocity
    speed = np.linalg.norm(u)
    if speed < _TINY:
        return 0.0
    cos = u @ diff / (speed * p)
    if cos >= 0:
        return 0.0
    return params.lam * (-cos) ** params.beta * speed / p


def point_cos_theta(x, v, obs: PointObstacle):
    """Cosine of the angle between relative velocity and ``x - o``."""
    diff = np.asarray(x, float) - obs.position
    u = np.asarray(v, float) - obs.velocity
    return float(u @ diff / (np.linalg.norm(u) * np.linalg.norm(diff)))


def steering_angle(x, v, obs: PointObstacle):
    """Angle between the obstacle direction ``o - x`` and the relative velocity."""
    r = obs.position - np.asarray(x, float)
    u = np.asarray(v, float) - obs.velocity
    c = r @ u / (np.linalg.norm(r) * np.linalg.norm(u))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def steering_many(x, v, positions, velocities, params: SteeringAngle):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    dims = x.size
    if dims not in (2, 3):
        raise ValueError("the steering-angle method is only defined in 2-D and 3-D")
    r = positions - x
    u = v - velocities
    rn = np.sqrt(np.einsum("ij,ij->i", r, r))
    un = np.sqrt(np.einsum("ij,ij->i", u, u))
    vn = np.linalg.norm(v)
    if dims == 2:
        cross = np.abs(r[:, 0] * v[1] - r[:, 1] * v[0])
    else:
        cross = np.linalg.norm(np.cross(r, v), axis=1)
    # Zero relative speed or a rotation axis that is undefined.
    ok = (un >= _TINY) & (rn >= _TINY) & (cross > _TINY * rn * vn)
    if not np.any(ok):
        return np.zeros(dims)
    r, u, rn, un, cross = r[ok], u[ok], rn[ok], un[ok], cross[ok]
    cos = np.clip(np.einsum("ij,ij->i", r, u) / (rn * un), -1.0, 1.0)
    th = np.arccos(cos)
    # v rotated by +90 degrees about (r x v): (v (r.v) - r |v|^2) / |r x v|.
    rotated = (np.outer(r @ v, v) - vn ** 2 * r) / cross[:, None]
    return params.gamma * ((th * np.exp(-params.beta * th))[:, None] * rotated).sum(axis=0)


def _single(obs):
    return obs.position[None, :], obs.velocity[None, :]


def static_point_phi(x, v, obs: PointObstacle, params: StaticPoint):
    """Repulsion of one point with a finite influence radius; ignores ``v``."""
    return static_point_many(x, obs.position[None, :], params)


def dynamic_point_phi(x, v, obs: PointObstacle, params: DynamicPoint):
    """Velocity-dependent repulsion of one (possibly moving) point."""
    return dynamic_point_many(x, v, *_single(obs), params)


def steering_phi(x, v, obs: PointObstacle, params: SteeringAngle):
    """Steering-angle perturbation; zero in degenerate geometry."""
    return steering_many(x, v, *_single(obs), params)


# -- volumetric obstacles ----------------------------------------------------

def _outside(sq, x):
    c = ob.isopotential(sq, x)
    if c <= 0:
        raise InsideObstacleError(f"position {np.asarray(x)} is inside the obstacle (C = {c:.3g})")
    return c


def _check_outside(values, x):
    inside = np.flatnonzero(values <= 0)
    if inside.size:
        i = inside[0]
        where = x[i] if x.ndim == 2 else x
        err = InsideObstacleError(
            f"position {where} is inside the obstacle (C = {values[i]:.3g})")
        err.index = int(i)
        raise err


def _rowdot(a, b):
    return np.sum(a * b, axis=-1)


def static_volume_many(x, v, batch: ob.SuperquadricBatch, params: StaticVolume):
    """Per-obstacle static volumetric terms, shape ``(P, d)``.

    ``x`` is one point or one point per obstacle; ``v`` is unused.
    """
    x = np.asarray(x, dtype=float)
    c, grad = batch.derivatives(x)
    _check_outside(c, x)
    scale = params.amplitude * np.exp(-params.eta * c) * (params.eta * c + 1) / c ** 2
    return scale[:, None] * grad


def dynamic_volume_many(x, v, batch: ob.SuperquadricBatch, params: DynamicVolume):
    """Per-obstacle dynamic volumetric terms, shape ``(P, d)``.

    ``x`` and ``v`` are one state or one state per obstacle.
    """
    x = np.asarray(x, dtype=float)
    if params.fd_cos_gradient:
        xs = np.broadcast_to(x, batch.centers.shape)
        vs = np.broadcast_to(np.asarray(v, float), batch.centers.shape)
        return np.stack([dynamic_volume_phi(xi, vi, sq, params)
                         for xi, vi, sq in zip(xs, vs, batch.shapes)])
    c, g, hess = batch.derivatives(x, order=2)
    _check_outside(c, x)
    u = np.asarray(v, float) - batch.velocities
    speed = np.sqrt(_rowdot(u, u))
    gn = np.sqrt(_rowdot(g, g))
    if np.any(gn < _TINY):
        raise SingularityError(f"isopotential gradient vanishes at {x}")
    gu = _rowdot(g, u)
    moving = speed >= _TINY
    speed_safe = np.where(moving, speed, 1.0)
    cos = np.where(moving, gu / (gn * speed_safe), 0.0)
    active = cos < 0
    if not np.any(active):
        return np.zeros_like(g)
    neg = np.where(active, -cos, 0.0)
    grad_gn = np.matmul(hess, g[:, :, None])[:, :, 0] / gn[:, None]
    hu = np.matmul(hess, u[:, :, None])[:, :, 0]
    grad_cos = (gn[:, None] * hu - gu[:, None] * grad_gn) / (speed_safe * gn ** 2)[:, None]
    # neg ** (beta - 1) is zero on inactive rows because beta > 1.
    scale = params.lam * speed * neg ** (params.beta - 1) / c ** params.eta
    return -scale[:, None] * (-params.beta * grad_cos + (params.eta * cos / c)[:, None] * g)


def static_volume_potential(x, v, sq: Superquadric, params: StaticVolume):
    c = _outside(sq, x)
    return params.amplitude * np.exp(-params.eta * c) / c


def static_volume_phi(x, v, sq: Superquadric, params: StaticVolume):
    return static_volume_many(x, v, ob.SuperquadricBatch([sq]), params)[0]


def volume_cos_theta(x, v, sq: Superquadric):
    """Cosine between the isopotential gradient and the relative velocity."""
    g = ob.isopotential_gradient(sq, x)
    u = np.asarray(v, float) - sq.velocity
    return float(g @ u / (np.linalg.norm(g) * np.linalg.norm(u)))


def dynamic_volume_potential(x, v, sq: Superquadric, params: DynamicVolume):
    c = _outside(sq, x)
    u = np.asarray(v, float) - sq.velocity
    speed = np.linalg.norm(u)
    if speed < _TINY:
        return 0.0
    cos = volume_cos_theta(x, v, sq)
    if cos >= 0:
        return 0.0
    return params.lam * (-cos) ** params.beta * speed / c ** params.eta


def _grad_cos_fd(sq, x, u):
    h = 1e-7 * sq.scale
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (volume_cos_theta(x + e, u, _static(sq))
                  - volume_cos_theta(x - e, u, _static(sq))) / (2 * h)
    return out


def _static(sq):
    return sq if not np.any(sq.velocity) else sq.moved(sq.center, np.zeros_like(sq.center))


def dynamic_volume_phi(x, v, sq: Superquadric, params: DynamicVolume):
    """Negative gradient of the dynamic volumetric potential at fixed ``v``."""
    x = np.asarray(x, dtype=float)
    if not params.fd_cos_gradient:
        return dynamic_volume_many(x, v, ob.SuperquadricBatch([sq]), params)[0]
    c = _outside(sq, x)
    u = np.asarray(v, float) - sq.velocity
    speed = np.linalg.norm(u)
    if speed < _TINY:
        return np.zeros_like(x)
    g = ob.isopotential_gradient(sq, x)
    gn = np.linalg.norm(g)
    if gn < _TINY:
        raise SingularityError(f"isopotential gradient vanishes at {x}")
    cos = g @ u / (gn * speed)
    if cos >= 0:
        return np.zeros_like(x)
    grad_cos = _grad_cos_fd(sq, x, u)
    scale = params.lam * speed * (-cos) ** (params.beta - 1) / c ** params.eta
    return -scale * (-params.beta * grad_cos + (params.eta * cos / c) * g)


# -- dispatch and composition -------------------------------------------------

PHI = {
    StaticPoint: static_point_phi,
    DynamicPoint: dynamic_point_phi,
    SteeringAngle: steering_phi,
    StaticVolume: static_volume_phi,
    DynamicVolume: dynamic_volume_phi,
}

POTENTIAL = {
    StaticPoint: lambda x, v, obs, prm: static_point_potential(x, obs, prm),
    DynamicPoint: dynamic_point_potential,
    StaticVolume: static_volume_potential,
    DynamicVolume: dynamic_volume_potential,
}


def perturbation(method: AvoidanceMethod, x, v, obstacle):
    """Evaluate ``method`` against a single obstacle."""
    return PHI[type(method)](x, v, obstacle, method)


def potential(method: AvoidanceMethod, x, v, obstacle):
    """Scalar potential of a potential-based method (not the steering angle)."""
    try:
        fn = POTENTIAL[type(method)]
    except KeyError:
        raise TypeError(f"{type(method).__name__} has no potential") from None
    return fn(x, v, obstacle, method)


class _PointTerm:
    def __init__(self, method, points: Sequence[PointObstacle]):
        self.method = method
        self.positions = np.stack([p.position for p in points])
        self.velocities = np.stack([p.velocity for p in points])

    def __call__(self, x, v):
        m = self.method
        if isinstance(m, StaticPoint):
            return static_point_many(x, self.positions, m)
        if isinstance(m, DynamicPoint):
            return dynamic_point_many(x, v, self.positions, self.velocities, m)
        return steering_many(x, v, self.positions, self.velocities, m)

    def many(self, xs, vs):
        out = np.empty_like(xs)
        for r, (x, v) in enumerate(zip(xs, vs)):
            try:
                out[r] = self(x, v)
            except DmpError as exc:
                exc.index, exc.state = 0, r
                raise
        return out


class _VolumeTerm:
    """Same-method superquadrics evaluated together."""

    def __init__(self, method, shapes: Sequence[Superquadric]):
        self.method = method
        self.batch = ob.SuperquadricBatch(shapes)
        self._tiled = {1: self.batch}

    def many(self, xs, vs):
        """Summed term for each of ``R`` states, shape ``(R, d)``."""
        reps = len(xs)
        size = len(self.batch)
        tiled = self._tiled.get(reps)
        if tiled is None:
            tiled = self._tiled[reps] = self.batch.tile(reps)
        xr = np.repeat(xs, size, axis=0)
        vr = np.repeat(vs, size, axis=0)
        kernel = static_volume_many if isinstance(self.method, StaticVolume) else dynamic_volume_many
        try:
            rows = kernel(xr, vr, tiled, self.method)
        except DmpError as exc:
            i = getattr(exc, "index", 0)
            exc.index, exc.state = i % size, i // size
            raise
        return rows.reshape(reps, size, -1).sum(axis=1)


class ComposedField:
    """Sum of several method/obstacle perturbations.

    Callable as ``field(x, v, t)``; :meth:`many` evaluates several states at
    once with bit-identical results. Volumetric members sharing a method are
    evaluated as one batch. Errors raised by a member are re-raised with the
    member index and time attached.
    """

    def __init__(self, terms, members, owners):
        self._terms = terms
        self._owners = owners
        self.members = members

    def __call__(self, x, v, t=0.0):
        x = np.asarray(x, dtype=float)
        return self.many(x[None], np.asarray(v, dtype=float)[None], t)[0]

    def many(self, xs, vs, t=0.0):
        """Field at ``R`` states; ``xs`` and ``vs`` have shape ``(R, d)``."""
        xs = np.asarray(xs, dtype=float)
        vs = np.asarray(vs, dtype=float)
        total = np.zeros(xs.shape)
        for term, owners in zip(self._terms, self._owners):
            try:
                total = total + term.many(xs, vs)
            except DmpError as exc:
                i = owners[getattr(exc, "index", 0)]
                method, _ = self.members[i]
                new = type(exc)(f"{exc} [member {i} ({method.kind}) at t = {t:.6g}]")
                new.state = getattr(exc, "state", 0)
                raise new from exc
        return total

    def __len__(self):
        return len(self.members)


def compose_field(members):
    """Build a perturbation field from ``(method, obstacle)`` pairs.

    Point methods take a :class:`PointObstacle` or a sequence of them (a
    cloud, one term per point); volumetric methods take a
    :class:`Superquadric`.
    """
    members = list(members)
    if not members:
        raise ValueError("compose_field needs at least one (method, obstacle) pair")
    terms, owners = [], []
    groups = {}
    for i, (method, obstacle) in enumerate(members):
        if isinstance(method, POINT_METHODS):
            points = [obstacle] if isinstance(obstacle, PointObstacle) else list(obstacle)
            if not points or not all(isinstance(p, PointObstacle) for p in points):
                raise TypeError(f"{method.kind} needs point obstacles")
            terms.append(_PointTerm(method, points))
            owners.append([i])
        elif isinstance(method, VOLUME_METHODS):
            if not isinstance(obstacle, Superquadric):
                raise TypeError(f"{method.kind} needs a Superquadric obstacle")
            groups.setdefault((method, obstacle.dims), []).append(i)
        else:
            raise TypeError(f"unknown avoidance method {method!r}")
    for (method, _), idx in groups.items():
        terms.append(_VolumeTerm(method, [members[i][1] for i in idx]))
        owners.append(idx)
    return ComposedField(terms, members, owners)
