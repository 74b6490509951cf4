"""Canonical system: the exponentially decaying phase variable."""

from dataclasses import dataclass

import numpy as np

DEFAULT_ALPHA = 4.0


@dataclass(frozen=True)
class CanonicalSystem:
    """Phase dynamics ``tau * ds/dt = -alpha * s`` with ``s(0) = 1``.

    Parameters
    ----------
    alpha : float
        Phase decay gain.
    tau : float
        Temporal scaling factor.
    """

    alpha: float = DEFAULT_ALPHA
    tau: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")

    def phase_at(self, t):
        """Closed-form phase at time(s) ``t``; scalar in, float out."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("phase is only defined for t >= 0")
        s = np.exp(-self.alpha * (t / self.tau))
        return float(s) if s.ndim == 0 else s


def phase_at(cs: CanonicalSystem, t):
    return cs.phase_at(t)
