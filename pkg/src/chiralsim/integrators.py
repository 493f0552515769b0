"""Fixed-step classical Runge-Kutta kernel shared by the time-domain modules."""
from __future__ import annotations

import numpy as np

from .errors import NumericalError


def rk4_step(f, t, y, dt):
    """Advance ``y' = f(t, y)`` by one classical fourth-order step."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def default_step(*rates):
    """Step rule dt = min(0.02 / rate) over the non-zero rates."""
    bounds = [0.02 / r for r in rates if r > 0]
    if not bounds:
        raise ValueError("cannot choose a step: every rate is zero")
    return min(bounds)


def check_finite(t, **arrays):
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            raise NumericalError(f"non-finite {name} at t={t!r}")
