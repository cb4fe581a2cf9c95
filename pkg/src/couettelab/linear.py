# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import dataclasses
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .cl_types import FitModel
from .exceptions import FitError, ModeStateError
from .grid import GridSpec, VectorField, laplacian_L_symbol
from .stepping import if_rk4
from .utils import debug_print, disable_tqdm

MIN_FIT_SAMPLES = 8


def dissipation_integral(k: float, eta: float, l: float, t: float) -> float:
    """Antiderivative of k^2 + (eta - k t)^2 + l^2, zero at t = 0."""
    return (k * k + eta * eta + l * l) * t - eta * k * t * t + k * k * t**3 / 3.0


def exact_q2_factor(k: float, eta: float, l: float, nu: float, t: float, t0: float = 0.0) -> float:
    return math.exp(
        -nu * (dissipation_integral(k, eta, l, t) - dissipation_integral(k, eta, l, t0))
    )


def inviscid_u2_ratio(k: float, eta: float, l: float, t: float, t0: float = 0.0) -> float:
    """u2(t)/u2(t0) at nu = 0: q2 is conserved, so only the symbol changes."""
    return float(laplacian_L_symbol(k, eta, l, t0) / laplacian_L_symbol(k, eta, l, t))


@dataclass(frozen=True)
class ModeState:
    k: float
    eta: float
    l: float
    q: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.k == 0 and self.eta == 0 and self.l == 0:
            raise ModeStateError("Mode (0, 0, 0) has no linear dynamics")

    @classmethod
    def initial(
        cls, k: float, eta: float, l: float, t: float = 0.0, velocity: Optional[Sequence] = None
    ) -> "ModeState":
        """Leray projection of a velocity vector (default (1, 1, 1)) onto the mode."""
        if k == 0 and eta == 0 and l == 0:
            raise ModeStateError("Mode (0, 0, 0) has no linear dynamics")
        v = np.asarray(velocity if velocity is not None else (1.0, 1.0, 1.0), dtype=complex)
        kt = np.array([k, eta - k * t, l], dtype=float)
        u = v - kt * (kt @ v) / (kt @ kt)
        return cls(k, eta, l, -(kt @ kt) * u, t)

    @property
    def symbol(self) -> float:
        return float(laplacian_L_symbol(self.k, self.eta, self.l, self.t))

    @property
    def u(self) -> np.ndarray:
        return self.q / self.symbol

    def divergence_defect(self) -> float:
        u = self.u
        return float(abs(self.k * u[0] + (self.eta - self.k * self.t) * u[1] + self.l * u[2]))

    def energy(self) -> float:
        return float(np.sum(np.abs(self.u) ** 2))


def coupling_matrix(k: float, eta: float, l: float, t: float) -> np.ndarray:
    """Non-dissipative part of the shear-frame linear system for (q1, q2, q3)."""
    kt2 = -float(laplacian_L_symbol(k, eta, l, t))
    stretch = -2.0 * k * (eta - k * t) / kt2
    return np.array(
        [
            [stretch, -1.0 + 2.0 * k * k / kt2, 0.0],
            [0.0, 0.0, 0.0],
            [0.0, 2.0 * k * l / kt2, stretch],
        ]
    )


def linear_mode_step(state: ModeState, nu: float, dt: float) -> ModeState:
    if dt <= 0:
        raise ModeStateError(f"Step size must be positive, got {dt}")

    def decay(t0: float, t1: float) -> np.ndarray:
        return np.asarray(exact_q2_factor(state.k, state.eta, state.l, nu, t1, t0))

    def couplings(q: np.ndarray, t: float) -> np.ndarray:
        return coupling_matrix(state.k, state.eta, state.l, t) @ q

    q = if_rk4(state.q, state.t, dt, couplings, decay)
    return dataclasses.replace(state, q=q, t=state.t + dt)


def default_dt(state: ModeState, tmax: float) -> float:
    kt_max = max(
        math.sqrt(-laplacian_L_symbol(state.k, state.eta, state.l, t)) for t in (state.t, tmax)
    )
    return min(0.01, 0.1 / kt_max)


def evolve_mode(state: ModeState, nu: float, tmax: float, dt: Optional[float] = None) -> ModeState:
    dt = dt or default_dt(state, tmax)
    while state.t < tmax - 1e-12:
        state = linear_mode_step(state, nu, min(dt, tmax - state.t))
    return state


class SeriesRow(NamedTuple):
    t: float
    u1: float
    u2: float
    u3: float
    q1: float
    q2: float
    q3: float


SERIES_HEADER = ["t", "|u1|", "|u2|", "|u3|", "|q1|", "|q2|", "|q3|"]


def _row(state: ModeState) -> SeriesRow:
    u = np.abs(state.u)
    q = np.abs(state.q)
    return SeriesRow(state.t, *map(float, u), *map(float, q))


def linear_series(
    state: ModeState, nu: float, tmax: float, dt: Optional[float] = None, every: int = 1
) -> List[SeriesRow]:
    dt = dt or default_dt(state, tmax)
    steps = int(math.ceil((tmax - state.t) / dt - 1e-9))
    debug_print(f"linear: mode=({state.k}, {state.eta}, {state.l}) nu={nu} dt={dt} steps={steps}")

    rows = [_row(state)]
    for n in tqdm(
        range(1, steps + 1),
        unit="step",
        desc="evolving mode",
        disable=disable_tqdm(),
    ):
        state = linear_mode_step(state, nu, min(dt, tmax - state.t))
        if n % every == 0 or n == steps:
            rows.append(_row(state))
    return rows


def zero_mode_evolution(u_in: VectorField, nu: float, t: float) -> VectorField:
    """Exact streak-mode solution: heat semigroup plus linear lift-up of u1 by u2."""
    if not isinstance(u_in.grid, GridSpec):
        raise ModeStateError("Zero-mode evolution needs a 3D field")

    k, eta, l = u_in.grid.mesh()
    x_modes = np.broadcast_to(k != 0, u_in.grid.shape)
    if np.any(np.abs(u_in.coeffs[:, x_modes]) > 0.0):
        raise ModeStateError("Input has x-dependent (k != 0) content")

    heat = np.exp(-nu * t * (eta * eta + l * l))
    out = np.empty_like(u_in.coeffs)
    out[0] = heat * (u_in.coeffs[0] - t * u_in.coeffs[1])
    out[1] = heat * u_in.coeffs[1]
    out[2] = heat * u_in.coeffs[2]
    return u_in.replace(out)


class FitResult(NamedTuple):
    model: FitModel
    coefficient: float
    intercept: float
    residual: float


def fit_rates(series: Sequence[Tuple[float, float]], model: FitModel) -> FitResult:
    """Least-squares fit of a (t, value) series.

    power_law: log v = a log t + b; cubic_exp: log v = a t^3 + b; linear: v = a t + b.
    """
    if len(series) < MIN_FIT_SAMPLES:
        raise FitError(model.value, f"needs at least {MIN_FIT_SAMPLES} samples, got {len(series)}")

    t = np.array([s[0] for s in series], dtype=float)
    v = np.array([s[1] for s in series], dtype=float)

    if model is FitModel.LINEAR:
        x, y = t, v
    else:
        if np.any(v <= 0.0):
            raise FitError(model.value, "values must be positive")
        y = np.log(v)
        if model is FitModel.POWER_LAW:
            if np.any(t <= 0.0):
                raise FitError(model.value, "times must be positive")
            x = np.log(t)
        else:
            x = t**3

    if np.ptp(x) == 0.0:
        raise FitError(model.value, "regressor is constant")

    design = np.column_stack([x, np.ones_like(x)])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    return FitResult(model, float(coef[0]), float(coef[1]), residual)
