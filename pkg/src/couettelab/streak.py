# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import dataclasses
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from tqdm import tqdm

from .cl_types import Frame
from .exceptions import GridSpecError
from .grid import (
    PlaneSpec,
    SpectralField,
    dealias,
    derivative,
    from_physical,
    l2_norm,
    to_physical,
)
from .stepping import if_rk4
from .utils import debug_print, disable_tqdm


def _plane_field(plane: PlaneSpec, coeffs: np.ndarray) -> SpectralField:
    return SpectralField(coeffs, plane, Frame.LAB)


def streamfunction(omega: SpectralField) -> SpectralField:
    """Solve Laplacian(psi) = omega, zero mean."""
    eta, l = omega.grid.mesh()
    k2 = eta * eta + l * l
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = np.where(k2 > 0.0, -omega.coeffs / k2, 0.0)
    return omega.replace(psi)


def velocity_from_vorticity(omega: SpectralField) -> Tuple[SpectralField, SpectralField]:
    """(u2, u3) = (-d_z psi, d_y psi), so that d_y u3 - d_z u2 = omega."""
    psi = streamfunction(omega)
    eta, l = omega.grid.mesh()
    return psi.replace(-1j * l * psi.coeffs), psi.replace(1j * eta * psi.coeffs)


@dataclass(frozen=True)
class StreakState:
    omega: SpectralField
    u1: SpectralField
    t: float = 0.0
    nu: float = 0.0

    @property
    def grid(self) -> PlaneSpec:
        return self.omega.grid  # type: ignore[return-value]

    @classmethod
    def from_velocity(
        cls,
        u1: SpectralField,
        u2: SpectralField,
        u3: SpectralField,
        t: float = 0.0,
        nu: float = 0.0,
    ) -> "StreakState":
        """Build from x-averaged velocity; the mean of (u2, u3) is not representable and drops."""
        if not isinstance(u1.grid, PlaneSpec):
            raise GridSpecError("grid", u1.grid, "streak fields live on a (y, z) plane")
        omega = derivative(u3, 0, t) - derivative(u2, 1, t)
        return cls(dealias(omega), dealias(u1), t, nu)  # type: ignore[arg-type]

    def velocity(self) -> Tuple[SpectralField, SpectralField, SpectralField]:
        u2, u3 = velocity_from_vorticity(self.omega)
        return self.u1, u2, u3

    def kinetic_energy(self) -> float:
        """Energy of the (u2, u3) part: 1/2 of its squared L2 norm."""
        _, u2, u3 = self.velocity()
        return 0.5 * (l2_norm(u2) ** 2 + l2_norm(u3) ** 2)

    def enstrophy(self) -> float:
        return l2_norm(self.omega) ** 2

    def cross_norm(self) -> float:
        return math.sqrt(2.0 * self.kinetic_energy())


def taylor_green(plane: PlaneSpec, amplitude: float = 1.0, nu: float = 0.0) -> StreakState:
    """omega = amplitude cos y cos z, u1 = 0."""
    y, z = plane.physical_mesh()
    omega = from_physical(plane, amplitude * np.cos(y) * np.cos(z), Frame.LAB)
    return StreakState(omega, _plane_field(plane, plane.zeros()), 0.0, nu)


def shear_layer(plane: PlaneSpec, eps: float, nu: float = 0.0) -> StreakState:
    """(u2, u3) = (eps sin z, 0), u1 = 0."""
    _, z = plane.physical_mesh()
    u2 = from_physical(plane, eps * np.sin(z), Frame.LAB)
    zero = _plane_field(plane, plane.zeros())
    return StreakState.from_velocity(zero, u2, zero, 0.0, nu)


def _advect(u2: np.ndarray, u3: np.ndarray, f: SpectralField) -> np.ndarray:
    """(u2, u3).grad f evaluated in physical space."""
    f_y = to_physical(derivative(f, 0, 0.0))
    f_z = to_physical(derivative(f, 1, 0.0))
    return u2 * f_y + u3 * f_z


def _nonlinear(plane: PlaneSpec, omega: np.ndarray, u1: np.ndarray) -> np.ndarray:
    w = _plane_field(plane, omega)
    v1 = _plane_field(plane, u1)
    u2_hat, u3_hat = velocity_from_vorticity(w)
    u2 = to_physical(u2_hat)
    u3 = to_physical(u3_hat)
    d_omega = from_physical(plane, -_advect(u2, u3, w), Frame.LAB)
    d_u1 = from_physical(plane, -_advect(u2, u3, v1), Frame.LAB)
    mask = plane.dealias_mask
    return np.stack(
        [
            np.where(mask, d_omega.coeffs, 0.0),
            np.where(mask, d_u1.coeffs - u2_hat.coeffs, 0.0),
        ]
    )


def _viscous_symbol(plane: PlaneSpec) -> np.ndarray:
    eta, l = plane.mesh()
    return eta * eta + l * l


def streak_rhs(state: StreakState) -> Tuple[SpectralField, SpectralField]:
    """Time derivatives (d omega/dt, d u1/dt), viscous terms included."""
    dissipation = -state.nu * _viscous_symbol(state.grid)
    rhs = _nonlinear(state.grid, state.omega.coeffs, state.u1.coeffs)
    return (
        state.omega.replace(rhs[0] + dissipation * state.omega.coeffs),
        state.u1.replace(rhs[1] + dissipation * state.u1.coeffs),
    )


def streak_step(state: StreakState, dt: float) -> StreakState:
    plane = state.grid
    symbol = _viscous_symbol(plane)

    def decay(t0: float, t1: float) -> np.ndarray:
        return np.exp(-state.nu * symbol * (t1 - t0))

    def nonlinear(y: np.ndarray, t: float) -> np.ndarray:
        return _nonlinear(plane, y[0], y[1])

    y = np.stack([state.omega.coeffs, state.u1.coeffs])
    y = if_rk4(y, state.t, dt, nonlinear, decay)
    return dataclasses.replace(
        state, omega=state.omega.replace(y[0]), u1=state.u1.replace(y[1]), t=state.t + dt
    )


class StreakRow(NamedTuple):
    t: float
    u1: float
    u23: float
    enstrophy: float


STREAK_HEADER = ["t", "|u1|", "|(u2,u3)|", "enstrophy"]


def streak_row(state: StreakState) -> StreakRow:
    return StreakRow(state.t, l2_norm(state.u1), state.cross_norm(), state.enstrophy())


def streak_trajectory(state: StreakState, tmax: float, dt: float) -> List[StreakState]:
    """Every state from t to tmax; the last step is shortened to land on tmax."""
    steps = int(math.ceil((tmax - state.t) / dt - 1e-9))
    debug_print(f"streak: nu={state.nu} dt={dt} steps={steps}")
    states = [state]
    for _ in tqdm(range(steps), unit="step", desc="evolving streak", disable=disable_tqdm()):
        state = streak_step(state, min(dt, tmax - state.t))
        states.append(state)
    return states


def streak_series(state: StreakState, tmax: float, dt: float, every: int = 1) -> List[StreakRow]:
    states = streak_trajectory(state, tmax, dt)
    rows = [streak_row(s) for s in states[::every]]
    if (len(states) - 1) % every:
        rows.append(streak_row(states[-1]))
    return rows
