"""Obstacle geometry.

Superquadric isopotentials (zero on the surface, negative inside,
increasing outward) with analytic first and second derivatives, point
obstacles, and boundary sampling for the point-based methods.

For offsets ``a_i = (x_i - center_i) / axes_i`` the isopotential is

    C = (a_1^(2n) + a_2^(2n))^(m/n) + a_3^(2p) - 1

where the third term only exists in 3-D and ``p`` defaults to ``m``.
``n = m = 1`` is an ellipse/ellipsoid; ``n = m = 2`` a rounded box.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import SingularityError

_GRAD_NORM_FLOOR = 1e-12


def _vec(a, name):
    a = np.array(a, dtype=float).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Superquadric:
    """Generalized ellipsoid in 2-D or 3-D.

    Parameters
    ----------
    center : array_like
        Center position.
    axes : array_like
        Positive semi-axes, one per dimension.
    exponents : tuple of int
        ``(n, m)``; both at least 1.
    velocity : array_like, optional
        Obstacle velocity, zero by default.
    z_exponent : int, optional
        Exponent ``p`` of the third axis (3-D only); defaults to ``m``.
        ``(n, m, p) = (1, 1, 2)`` gives a flat-capped cylinder.
    """

    center: np.ndarray
    axes: np.ndarray
    exponents: tuple = (1, 1)
    velocity: np.ndarray = None
    z_exponent: int = None

    def __post_init__(self):
        c = _vec(self.center, "center")
        ax = _vec(self.axes, "axes")
        if c.size not in (2, 3):
            raise ValueError("superquadrics are defined in 2-D and 3-D only")
        if ax.shape != c.shape or not np.all(ax > 0):
            raise ValueError("axes must be positive, one per dimension")
        n, m = (int(e) for e in self.exponents)
        if (n, m) != tuple(self.exponents) or n < 1 or m < 1:
            raise ValueError("exponents must be integers >= 1")
        vel = np.zeros_like(c) if self.velocity is None else _vec(self.velocity, "velocity")
        if vel.shape != c.shape:
            raise ValueError("velocity must match the center dimension")
        vel.setflags(write=False)
        p = m if self.z_exponent is None else int(self.z_exponent)
        if p < 1:
            raise ValueError("z_exponent must be >= 1")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axes", ax)
        object.__setattr__(self, "exponents", (n, m))
        object.__setattr__(self, "velocity", vel)
        object.__setattr__(self, "z_exponent", p)

    @property
    def dims(self):
        return self.center.size

    @property
    def scale(self):
        return float(np.min(self.axes))

    def moved(self, center, velocity=None):
        """Snapshot at a new position (and optionally velocity)."""
        return replace(self, center=center,
                       velocity=self.velocity if velocity is None else velocity)

    def __eq__(self, other):
        if not isinstance(other, Superquadric):
            return NotImplemented
        return (np.array_equal(self.center, other.center)
                and np.array_equal(self.axes, other.axes)
                and np.array_equal(self.velocity, other.velocity)
                and self.exponents == other.exponents
                and self.z_exponent == other.z_exponent)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PointObstacle:
    position: np.ndarray
    velocity: np.ndarray = None

    def __post_init__(self):
        p = _vec(self.position, "position")
        vel = np.zeros_like(p) if self.velocity is None else _vec(self.velocity, "velocity")
        if vel.shape != p.shape:
            raise ValueError("velocity must match the position dimension")
        vel.setflags(write=False)
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "velocity", vel)

    def __eq__(self, other):
        if not isinstance(other, PointObstacle):
            return NotImplemented
        return (np.array_equal(self.position, other.position)
                and np.array_equal(self.velocity, other.velocity))

    __hash__ = None


def inflate(sq: Superquadric, margins):
    """Copy of ``sq`` with every semi-axis enlarged by ``margins``."""
    return replace(sq, axes=sq.axes + np.broadcast_to(np.asarray(margins, float), sq.axes.shape))


def _check_dims(sq, x):
    if x.shape[-1] != sq.dims:
        raise ValueError(f"point has {x.shape[-1]} components, obstacle has {sq.dims}")


def isopotential(sq: Superquadric, x):
    """Isopotential value; accepts a point or an ``(..., d)`` array."""
    x = np.asarray(x, dtype=float)
    _check_dims(sq, x)
    n, m = sq.exponents
    a = (x - sq.center) / sq.axes
    r = a[..., 0] ** (2 * n) + a[..., 1] ** (2 * n)
    c = r if m == n else r ** (m / n)
    if sq.dims == 3:
        c = c + a[..., 2] ** (2 * sq.z_exponent)
    c = c - 1.0
    return float(c) if c.ndim == 0 else c


class SuperquadricBatch:
    """Several superquadrics of one dimension stacked for vectorized evaluation."""

    def __init__(self, shapes):
        shapes = list(shapes)
        if not shapes:
            raise ValueError("empty batch")
        dims = {sq.dims for sq in shapes}
        if len(dims) != 1:
            raise ValueError("all superquadrics in a batch must share the dimension")
        self._shapes = shapes
        self._size = len(shapes)
        self.dims = dims.pop()
        self.centers = np.stack([sq.center for sq in shapes])
        self.axes = np.stack([sq.axes for sq in shapes])
        self.velocities = np.stack([sq.velocity for sq in shapes])
        self.n = np.array([sq.exponents[0] for sq in shapes], dtype=float)
        self.m = np.array([sq.exponents[1] for sq in shapes], dtype=float)
        self.p = np.array([sq.z_exponent for sq in shapes], dtype=float)
        self.q = self.m / self.n
        self._unit_q = bool(np.all(self.q == 1))

    @classmethod
    def _from_arrays(cls, centers, axes, velocities, n, m, p):
        self = cls.__new__(cls)
        self.centers = centers
        self.axes = axes
        self.velocities = velocities
        self.dims = centers.shape[1]
        self.n, self.m, self.p = n, m, p
        self.q = m / n
        self._unit_q = bool(np.all(self.q == 1))
        self._size = len(centers)
        self._shapes = None
        return self

    @classmethod
    def ellipses(cls, centers, axes, velocities):
        """Planar ellipses straight from ``(P, 2)`` arrays, skipping per-shape
        validation; used in inner simulation loops."""
        centers = np.asarray(centers, dtype=float)
        ones = np.ones(len(centers))
        return cls._from_arrays(centers, np.asarray(axes, dtype=float),
                                np.asarray(velocities, dtype=float), ones, ones, ones)

    def tile(self, reps):
        """The whole batch repeated ``reps`` times (row ``k`` is shape ``k % P``)."""
        def t(arr):
            return np.tile(arr, (reps,) + (1,) * (arr.ndim - 1))
        return SuperquadricBatch._from_arrays(
            t(self.centers), t(self.axes), t(self.velocities), t(self.n), t(self.m), t(self.p))

    @property
    def shapes(self):
        if self._shapes is None:
            self._shapes = [
                Superquadric(c, ax, (int(n), int(m)), v, int(p) if self.dims == 3 else None)
                for c, ax, v, n, m, p in zip(self.centers, self.axes, self.velocities,
                                             self.n, self.m, self.p)]
        return self._shapes

    def __len__(self):
        return self._size

    def derivatives(self, x, order=1):
        """Values ``(P,)``, gradients ``(P, d)`` and, for ``order=2``,
        Hessians ``(P, d, d)`` of every isopotential.

        ``x`` is one point ``(d,)`` shared by all shapes or one point per
        shape ``(P, d)``.
        """
        x = np.asarray(x, dtype=float)
        if x.shape not in ((self.dims,), (len(self), self.dims)):
            raise ValueError(f"points must have shape ({self.dims},) or ({len(self)}, {self.dims})")
        n2 = (2 * self.n)[:, None]
        a = (x - self.centers) / self.axes
        ap = a[:, :2]
        pw = ap ** (n2 - 2)
        dr = n2 * pw * ap
        r = np.sum(pw * ap * ap, axis=1)
        if self._unit_q:
            value = r.copy()
            grad_p = dr
            coef1 = None
        else:
            q = self.q
            on_axis = r == 0.0
            rs = np.where(on_axis, 1.0, r)
            value = np.where(on_axis, 0.0, rs ** q)
            rq1 = np.where(on_axis, 0.0, rs ** (q - 1))
            grad_p = (q * rq1)[:, None] * dr
            coef1 = np.where(on_axis, 0.0, q * (q - 1) * rs ** (q - 2))
        grad = np.zeros_like(a)
        grad[:, :2] = grad_p
        if self.dims == 3:
            p2 = 2 * self.p
            az = a[:, 2]
            azp = az ** (p2 - 2)
            value = value + azp * az * az
            grad[:, 2] = p2 * azp * az
        value = value - 1.0
        grad = grad / self.axes
        if order < 2:
            return value, grad
        d2r = n2 * (n2 - 1) * pw
        hess = np.zeros((len(self), self.dims, self.dims))
        if coef1 is None:
            hess[:, 0, 0] = d2r[:, 0]
            hess[:, 1, 1] = d2r[:, 1]
        else:
            hess[:, :2, :2] = coef1[:, None, None] * dr[:, :, None] * dr[:, None, :]
            scale = (self.q * rq1)[:, None] * d2r
            hess[:, 0, 0] += scale[:, 0]
            hess[:, 1, 1] += scale[:, 1]
        if self.dims == 3:
            hess[:, 2, 2] = p2 * (p2 - 1) * azp
        hess = hess / (self.axes[:, :, None] * self.axes[:, None, :])
        return value, grad, hess


def _single(sq):
    return SuperquadricBatch([sq])


def isopotential_gradient(sq: Superquadric, x):
    """Analytic gradient of the isopotential at one point."""
    x = np.asarray(x, dtype=float)
    _check_dims(sq, x)
    return _single(sq).derivatives(x)[1][0]


def isopotential_hessian(sq: Superquadric, x):
    """Analytic Hessian of the isopotential at one point."""
    x = np.asarray(x, dtype=float)
    _check_dims(sq, x)
    return _single(sq).derivatives(x, order=2)[2][0]


def isopotential_hessian_times(sq: Superquadric, x, v):
    """Gradient of ``<grad C(x), v>`` with respect to ``x`` (Hessian times v)."""
    return isopotential_hessian(sq, x) @ np.asarray(v, dtype=float)


def grad_norm_gradient(sq: Superquadric, x):
    """Gradient of ``||grad C(x)||`` with respect to ``x``.

    Raises
    ------
    SingularityError
        If the isopotential gradient vanishes at ``x`` (e.g. the center).
    """
    x = np.asarray(x, dtype=float)
    _check_dims(sq, x)
    _, g, h = _single(sq).derivatives(x, order=2)
    g, h = g[0], h[0]
    norm = np.linalg.norm(g)
    if norm < _GRAD_NORM_FLOOR:
        raise SingularityError(f"isopotential gradient vanishes at {x}")
    return h @ g / norm


def boundary_points(sq: Superquadric, count):
    """``count`` positions on the zero-level set of a planar superquadric.

    Points are equally spaced in the angle of the parametrization
    ``a = (sgn cos t |cos t|^(1/n), sgn sin t |sin t|^(1/n))``.
    """
    if sq.dims != 2:
        raise ValueError("boundary sampling is only defined for planar obstacles")
    if int(count) != count or count < 3:
        raise ValueError("need at least three boundary points")
    n, _ = sq.exponents
    t = 2 * np.pi * np.arange(int(count)) / count
    c, s = np.cos(t), np.sin(t)
    a = np.stack([np.sign(c) * np.abs(c) ** (1 / n), np.sign(s) * np.abs(s) ** (1 / n)], axis=1)
    return sq.center + a * sq.axes


def discretize_boundary(sq: Superquadric, count):
    """Point obstacles on the boundary, each moving with the obstacle."""
    return [PointObstacle(p, sq.velocity) for p in boundary_points(sq, count)]
