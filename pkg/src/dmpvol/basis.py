"""Gaussian radial basis over the phase and the gated forcing term."""

import sys
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateNormalizationError

# Smallest positive normal double; sums of activations below it are
# treated as a degenerate normalization.
_DENOM_FLOOR = sys.float_info.min


@dataclass(frozen=True, eq=False)
class BasisSet:
    """Centers ``c_i`` and widths ``h_i`` of ``N + 1`` Gaussian kernels.

    Use :func:`make_basis` to construct one; the constructor only checks
    the invariants.
    """

    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        h = np.asarray(self.widths, dtype=float)
        if c.ndim != 1 or c.shape != h.shape or c.size < 2:
            raise ValueError("centers and widths must be 1-D of equal length >= 2")
        if not (np.all(c > 0) and np.all(c <= 1) and np.all(np.diff(c) < 0)):
            raise ValueError("centers must be strictly decreasing in (0, 1]")
        if not (np.all(np.isfinite(h)) and np.all(h > 0)):
            raise ValueError("widths must be positive and finite")
        c.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", h)

    @property
    def count(self):
        return self.centers.size

    def __eq__(self, other):
        if not isinstance(other, BasisSet):
            return NotImplemented
        return np.array_equal(self.centers, other.centers) and np.array_equal(
            self.widths, other.widths
        )

    __hash__ = None


def make_basis(n, alpha, duration, tau=1.0):
    """Build ``n + 1`` kernels spread over the phase range of a demo.

    Centers are the phase values reached at the ``n + 1`` equally spaced
    instants ``i * duration / n``, i.e. ``c_i = exp(-alpha * i * duration /
    (n * tau))``. With ``tau = 1`` this is the textbook placement; the
    learner passes ``tau = duration`` so the centers cover ``[e^-alpha, 1]``
    whatever the demonstration length.

    Widths are the inverse squared gap to the next center, the last one
    repeating its predecessor.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"need at least one basis interval (n >= 1), got {n}")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not duration > 0:
        raise ValueError("duration must be positive")
    if not tau > 0:
        raise ValueError("tau must be positive")
    n = int(n)
    i = np.arange(n + 1)
    centers = np.exp(-alpha * i * duration / (n * tau))
    widths = np.empty(n + 1)
    widths[:-1] = 1.0 / np.diff(centers) ** 2
    widths[-1] = widths[-2]
    return BasisSet(centers, widths)


def eval_basis(bs: BasisSet, s):
    """Kernel activations ``exp(-h_i (s - c_i)^2)``.

    Scalar ``s`` gives shape ``(N+1,)``; an array of ``M`` phases gives
    ``(M, N+1)``.
    """
    s = np.asarray(s, dtype=float)
    return np.exp(-bs.widths * (s[..., None] - bs.centers) ** 2)


def normalized_features(bs: BasisSet, s):
    """Regression features ``psi_i(s) * s / sum_j psi_j(s)``.

    This is the design matrix of the forcing term: ``forcing = features @ w``.
    """
    s = np.asarray(s, dtype=float)
    psi = eval_basis(bs, s)
    total = psi.sum(axis=-1, keepdims=True)
    if np.any(total < _DENOM_FLOOR):
        bad = np.atleast_1d(s)[np.atleast_1d(total[..., 0] < _DENOM_FLOOR)]
        raise DegenerateNormalizationError(
            f"basis activations vanish at phase {bad[0]!r}; "
            "reduce alpha * duration or add basis functions"
        )
    return psi * (s[..., None] / total)


def forcing_value(bs: BasisSet, weights, s):
    """Gated forcing ``s * sum(w_i psi_i) / sum(psi_i)``.

    ``weights`` may be one row of ``N + 1`` values or a ``(d, N + 1)``
    array, in which case one value per dimension is returned. ``s`` may be
    scalar or an array of phases (leading axis).
    """
    w = np.asarray(weights, dtype=float)
    if w.shape[-1] != bs.count:
        raise ValueError(f"expected {bs.count} weights per row, got {w.shape[-1]}")
    s = np.asarray(s, dtype=float)
    psi = eval_basis(bs, s)
    total = psi.sum(axis=-1)
    if np.any(total < _DENOM_FLOOR):
        raise DegenerateNormalizationError(
            f"basis activations vanish (sum {np.min(total)!r}) at the requested phase"
        )
    num = psi @ w.T
    if w.ndim == 1:
        return num / total * s
    return num / total[..., None] * s[..., None]
