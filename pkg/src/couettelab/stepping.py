# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

from typing import Callable

import numpy as np

Rhs = Callable[[np.ndarray, float], np.ndarray]
Decay = Callable[[float, float], np.ndarray]


def if_rk4(y: np.ndarray, t: float, dt: float, nonlinear: Rhs, decay: Decay) -> np.ndarray:
    """One integrating-factor RK4 (Lawson) step of y' = L y + N(y, t).

    decay(t0, t1) returns the exact propagator of the stiff linear part from
    t0 to t1, so time-dependent symbols (shear-frame Laplacian) are allowed.
    """
    th = t + 0.5 * dt
    t1 = t + dt
    e0h = decay(t, th)
    eh1 = decay(th, t1)
    e01 = decay(t, t1)

    k1 = nonlinear(y, t)
    k2 = nonlinear(e0h * (y + 0.5 * dt * k1), th)
    k3 = nonlinear(e0h * y + 0.5 * dt * k2, th)
    k4 = nonlinear(e01 * y + dt * eh1 * k3, t1)
    return e01 * y + dt / 6.0 * (e01 * k1 + 2.0 * eh1 * (k2 + k3) + k4)

