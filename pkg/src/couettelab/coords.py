# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

"""Streak-adapted coordinates (Y, Z) = (y + psi, z + phi) on the (y, z) plane.

C1(Y, Z) = psi(y, z) and C2(Y, Z) = phi(y, z) are evolved together with the
auxiliary unknown g = (U1_0 - C1)/t. Every field here is a LAB-frame plane field
indexed by (Y, Z) unless a function says otherwise.
"""

import bisect
import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .cl_types import Frame, Laplacian
from .config import config
from .exceptions import FixedPointError, GridSpecError, InvertibilityError
from .grid import (
    PlaneSpec,
    SpectralField,
    dealias,
    derivative,
    evaluate_at,
    from_physical,
    l2_norm,
    laplacian,
    to_physical,
)
from .stepping import if_rk4
from .streak import StreakState
from .utils import debug_print, disable_tqdm

Velocity = Tuple[SpectralField, SpectralField, SpectralField]


def _field(plane: PlaneSpec, values: np.ndarray) -> SpectralField:
    return from_physical(plane, values, Frame.LAB)


def _d(f: SpectralField, axis: int) -> SpectralField:
    return derivative(f, axis, 0.0)  # type: ignore[return-value]


def _dp(f: SpectralField, axis: int) -> np.ndarray:
    return to_physical(_d(f, axis))


@dataclass(frozen=True)
class JacobianSet:
    """Jacobian factors psi_y, psi_z, phi_y, phi_z as functions of (Y, Z)."""

    psi_y: np.ndarray
    psi_z: np.ndarray
    phi_y: np.ndarray
    phi_z: np.ndarray
    dC: Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    plane: PlaneSpec

    @property
    def G_yy(self) -> np.ndarray:
        return (1.0 + self.psi_y) ** 2 + self.psi_z**2 - 1.0

    @property
    def G_yz(self) -> np.ndarray:
        return 2.0 * self.phi_y * (1.0 + self.psi_y) + 2.0 * self.psi_z * (1.0 + self.phi_z)

    @property
    def G_zz(self) -> np.ndarray:
        return (1.0 + self.phi_z) ** 2 + self.phi_y**2 - 1.0

    def determinant(self) -> np.ndarray:
        """det(I - grad C) pointwise."""
        c1_y, c1_z, c2_y, c2_z = self.dC
        return (1.0 - c1_y) * (1.0 - c2_z) - c1_z * c2_y

    def fields(self) -> Tuple[SpectralField, ...]:
        return tuple(
            _field(self.plane, v) for v in (self.psi_y, self.psi_z, self.phi_y, self.phi_z)
        )


def grad_norm(C1: SpectralField, C2: SpectralField) -> float:
    grads = [_dp(C1, 0), _dp(C1, 1), _dp(C2, 0), _dp(C2, 1)]
    return float(np.max(np.sqrt(sum(g * g for g in grads))))


def jacobian_from_C(C1: SpectralField, C2: SpectralField, t: float = math.nan) -> JacobianSet:
    """Pointwise solve of the 4x4 chain-rule system for (psi_y, psi_z, phi_y, phi_z)."""
    plane = C1.grid
    if not isinstance(plane, PlaneSpec):
        raise GridSpecError("grid", plane, "coordinates live on a (y, z) plane")

    c1_y, c1_z, c2_y, c2_z = _dp(C1, 0), _dp(C1, 1), _dp(C2, 0), _dp(C2, 1)
    norm = float(np.max(np.sqrt(c1_y**2 + c1_z**2 + c2_y**2 + c2_z**2)))
    if norm >= config.invertibility_limit:
        raise InvertibilityError(t, norm)

    zero = np.zeros_like(c1_y)
    matrix = np.stack(
        [
            np.stack([1.0 - c1_y, zero, -c1_z, zero], axis=-1),
            np.stack([zero, 1.0 - c1_y, zero, -c1_z], axis=-1),
            np.stack([-c2_y, zero, 1.0 - c2_z, zero], axis=-1),
            np.stack([zero, -c2_y, zero, 1.0 - c2_z], axis=-1),
        ],
        axis=-2,
    )
    rhs = np.stack([c1_y, c1_z, c2_y, c2_z], axis=-1)[..., None]

    det = (1.0 - c1_y) * (1.0 - c2_z) - c1_z * c2_y
    min_det = float(np.min(np.abs(det)))
    if min_det < 1e-12:
        raise InvertibilityError(t, norm, min_det)

    solution = np.linalg.solve(matrix, rhs)[..., 0]
    return JacobianSet(
        solution[..., 0],
        solution[..., 1],
        solution[..., 2],
        solution[..., 3],
        (c1_y, c1_z, c2_y, c2_z),
        plane,
    )


def identity_residuals(jac: JacobianSet) -> Tuple[float, float, float, float]:
    """Residuals of psi_y = (1 + psi_y) C1_Y + phi_y C1_Z and its three companions."""
    c1_y, c1_z, c2_y, c2_z = jac.dC
    return (
        float(np.max(np.abs(jac.psi_y - (1.0 + jac.psi_y) * c1_y - jac.phi_y * c1_z))),
        float(np.max(np.abs(jac.psi_z - (1.0 + jac.phi_z) * c1_z - jac.psi_z * c1_y))),
        float(np.max(np.abs(jac.phi_y - (1.0 + jac.psi_y) * c2_y - jac.phi_y * c2_z))),
        float(np.max(np.abs(jac.phi_z - (1.0 + jac.phi_z) * c2_z - jac.psi_z * c2_y))),
    )


def _chain_y(jac: JacobianSet, f: SpectralField) -> np.ndarray:
    """d/dy of f(Y, Z) in lab coordinates."""
    return (1.0 + jac.psi_y) * _dp(f, 0) + jac.phi_y * _dp(f, 1)


def _chain_z(jac: JacobianSet, f: SpectralField) -> np.ndarray:
    return jac.psi_z * _dp(f, 0) + (1.0 + jac.phi_z) * _dp(f, 1)


def delta_tilde_t(f: SpectralField, jac: JacobianSet) -> SpectralField:
    """Second-order part of the lab Laplacian written in (Y, Z)."""
    f_yy = _d(_d(f, 0), 0)
    f_yz = _d(_d(f, 0), 1)
    f_zz = _d(_d(f, 1), 1)
    values = (
        to_physical(f_yy)
        + to_physical(f_zz)
        + jac.G_yy * to_physical(f_yy)
        + jac.G_yz * to_physical(f_yz)
        + jac.G_zz * to_physical(f_zz)
    )
    return dealias(_field(jac.plane, values))  # type: ignore[return-value]


def laplacian_of_coords(jac: JacobianSet) -> Tuple[np.ndarray, np.ndarray]:
    """(Delta_t C1, Delta_t C2) in divergence form: d_y(psi_y) + d_z(psi_z), etc."""
    psi_y, psi_z, phi_y, phi_z = jac.fields()
    return (
        _chain_y(jac, psi_y) + _chain_z(jac, psi_z),
        _chain_y(jac, phi_y) + _chain_z(jac, phi_z),
    )


def delta_t(f: SpectralField, jac: JacobianSet) -> SpectralField:
    lap_c1, lap_c2 = laplacian_of_coords(jac)
    first_order = lap_c1 * _dp(f, 0) + lap_c2 * _dp(f, 1)
    return delta_tilde_t(f, jac) + dealias(_field(jac.plane, first_order))  # type: ignore


class InverseMap(NamedTuple):
    Y: np.ndarray
    Z: np.ndarray
    iterations: int


def inverse_map(C1: SpectralField, C2: SpectralField) -> InverseMap:
    """(Y, Z) at every lab grid point (y, z): fixed point of Y = y + C1(Y, Z), Z = z + C2(Y, Z)."""
    y, z = C1.grid.physical_mesh()
    Y, Z = y.copy(), z.copy()
    residual = math.inf
    for n in range(1, config.fixed_point_max_iter + 1):
        Y_next = y + evaluate_at(C1, (Y, Z)).real
        Z_next = z + evaluate_at(C2, (Y, Z)).real
        residual = float(max(np.max(np.abs(Y_next - Y)), np.max(np.abs(Z_next - Z))))
        Y, Z = Y_next, Z_next
        if residual <= config.fixed_point_tol:
            return InverseMap(Y, Z, n)
    raise FixedPointError(config.fixed_point_max_iter, residual)


def compose_inverse(f: SpectralField, C1: SpectralField, C2: SpectralField) -> np.ndarray:
    """Values of f(Y(y, z), Z(y, z)) on the lab grid."""
    inv = inverse_map(C1, C2)
    return evaluate_at(f, (inv.Y, inv.Z)).real


def sobolev_norm(field: SpectralField, order: float = 0.0) -> float:
    eta, l = field.grid.mesh()
    weight = (1.0 + eta * eta + l * l) ** order
    return math.sqrt(field.grid.volume * float(np.sum(weight * np.abs(field.coeffs) ** 2)))


class TwoPathResult(NamedTuple):
    max_error: float
    scale: float


def laplacian_two_path(C1: SpectralField, C2: SpectralField) -> TwoPathResult:
    """Delta_t C1 composed onto the lab grid against the lab Laplacian of psi."""
    jac = jacobian_from_C(C1, C2)
    lap_c1, _ = laplacian_of_coords(jac)
    inv = inverse_map(C1, C2)
    via_coords = evaluate_at(_field(jac.plane, lap_c1), (inv.Y, inv.Z)).real

    psi = _field(jac.plane, evaluate_at(C1, (inv.Y, inv.Z)).real)
    via_lab = to_physical(laplacian(psi, 0.0))
    scale = float(np.max(np.abs(via_lab))) or 1.0
    return TwoPathResult(float(np.max(np.abs(via_coords - via_lab))), scale)


class U0Feed:
    """Background streak velocity (U1_0, U2_0, U3_0) as seen in (Y, Z)."""

    def __call__(self, t: float, C1: SpectralField, C2: SpectralField) -> Velocity:
        raise NotImplementedError

    def lab_velocity(self, t: float) -> Velocity:
        raise NotImplementedError


class SteadyFeed(U0Feed):
    """A velocity given directly in (Y, Z), fixed in time."""

    def __init__(self, u1: SpectralField, u2: SpectralField, u3: SpectralField) -> None:
        self.velocity = (u1, u2, u3)

    def __call__(self, t: float, C1: SpectralField, C2: SpectralField) -> Velocity:
        return self.velocity

    def lab_velocity(self, t: float) -> Velocity:
        return self.velocity


class ZeroFeed(SteadyFeed):
    def __init__(self, plane: PlaneSpec) -> None:
        zero = SpectralField(plane.zeros(), plane, Frame.LAB)
        super().__init__(zero, zero, zero)


class StreakFeed(U0Feed):
    """Streak states interpolated linearly in time, composed as U0(Y, Z) = u0(Y - C1, Z - C2)."""

    def __init__(self, states: Sequence[StreakState]) -> None:
        if not states:
            raise GridSpecError("states", len(states), "streak feed needs at least one state")
        self.states = list(states)
        self.times = [s.t for s in self.states]

    def lab_velocity(self, t: float) -> Velocity:
        i = bisect.bisect_right(self.times, t) - 1
        i = min(max(i, 0), len(self.states) - 1)
        if i == len(self.states) - 1 or t <= self.times[0]:
            return self.states[i].velocity()

        t0, t1 = self.times[i], self.times[i + 1]
        theta = (t - t0) / (t1 - t0)
        v0 = self.states[i].velocity()
        v1 = self.states[i + 1].velocity()
        return tuple(  # type: ignore[return-value]
            a.replace((1.0 - theta) * a.coeffs + theta * b.coeffs) for a, b in zip(v0, v1)
        )

    def __call__(self, t: float, C1: SpectralField, C2: SpectralField) -> Velocity:
        lab = self.lab_velocity(t)
        c1 = to_physical(C1)
        c2 = to_physical(C2)
        if not np.any(c1) and not np.any(c2):
            return lab
        Y, Z = C1.grid.physical_mesh()
        points = (Y - c1, Z - c2)
        composed = [dealias(_field(C1.grid, evaluate_at(u, points).real)) for u in lab]
        return tuple(composed)  # type: ignore[return-value]


ForcingFeed = Callable[[float], SpectralField]


@dataclass(frozen=True)
class CoordState:
    C1: SpectralField
    C2: SpectralField
    g: SpectralField
    t: float = 1.0
    nu: float = 0.0

    @property
    def grid(self) -> PlaneSpec:
        return self.C1.grid  # type: ignore[return-value]

    @classmethod
    def initial(cls, u1_0: SpectralField, t0: float = 1.0, nu: float = 0.0) -> "CoordState":
        """C = 0 and g = (U1_0 - C1)/t0 = U1_0/t0."""
        if t0 < 1.0:
            raise GridSpecError("t0", t0, "coordinate evolution starts at t >= 1")
        zero = u1_0.replace(np.zeros_like(u1_0.coeffs))
        return cls(zero, zero, u1_0.scale(1.0 / t0), t0, nu)

    def jacobian(self) -> JacobianSet:
        return jacobian_from_C(self.C1, self.C2, self.t)


def _transport(g: np.ndarray, f: SpectralField) -> np.ndarray:
    return g * _dp(f, 0)


def evolve_coord(
    state: CoordState,
    feed: U0Feed,
    dt: float,
    laplacian_kind: Laplacian = Laplacian.TILDE,
    forcing: Optional[ForcingFeed] = None,
) -> CoordState:
    """One step of the (C1, C2, g) system; nu Delta is exact, the metric correction explicit."""
    plane = state.grid
    eta, l = plane.mesh()
    symbol = eta * eta + l * l
    nu = state.nu

    def decay(t0: float, t1: float) -> np.ndarray:
        return np.exp(-nu * symbol * (t1 - t0))

    def nonlinear(y: np.ndarray, t: float) -> np.ndarray:
        C1, C2, g = (SpectralField(c, plane, Frame.LAB) for c in y)
        jac = jacobian_from_C(C1, C2, t)
        _, U2, U3 = feed(t, C1, C2)
        g_phys = to_physical(g)

        def viscous(f: SpectralField) -> np.ndarray:
            if nu == 0.0:
                return np.zeros_like(f.coeffs)
            full = delta_tilde_t(f, jac) if laplacian_kind is Laplacian.TILDE else delta_t(f, jac)
            return nu * (full.coeffs + symbol * f.coeffs)

        def advected(f: SpectralField) -> np.ndarray:
            return dealias(_field(plane, _transport(g_phys, f))).coeffs  # type: ignore

        dC1 = -advected(C1) + g.coeffs - U2.coeffs + viscous(C1)
        dC2 = -advected(C2) - U3.coeffs + viscous(C2)
        dg = -advected(g) - 2.0 * g.coeffs / t + viscous(g)
        if forcing is not None:
            dg = dg - forcing(t).coeffs / t
        return np.stack([dC1, dC2, dg])

    y = np.stack([state.C1.coeffs, state.C2.coeffs, state.g.coeffs])
    y = if_rk4(y, state.t, dt, nonlinear, decay)
    new = dataclasses.replace(
        state,
        C1=state.C1.replace(y[0]),
        C2=state.C2.replace(y[1]),
        g=state.g.replace(y[2]),
        t=state.t + dt,
    )
    # raises InvertibilityError stamped with the new time
    new.jacobian()
    return new


def psi_vs_u1(state: CoordState, u1_0: SpectralField, order: float = 0.0) -> float:
    """||psi - u1_0|| with psi(y, z) = C1(Y, Z) reconstructed on the lab grid."""
    if u1_0.grid != state.grid:
        raise GridSpecError("grid", u1_0.grid, "must match the coordinate grid")
    psi = _field(state.grid, compose_inverse(state.C1, state.C1, state.C2))
    return sobolev_norm(psi - u1_0, order)


class CoordRow(NamedTuple):
    t: float
    g: float
    C: float
    psi_u1: float
    min_det: float


COORD_HEADER = ["t", "|g| rms", "|C|", "|psi-u1_0|", "min det"]


def coord_row(state: CoordState, feed: U0Feed) -> CoordRow:
    jac = state.jacobian()
    u1_0 = feed.lab_velocity(state.t)[0]
    return CoordRow(
        state.t,
        l2_norm(state.g) / math.sqrt(state.grid.volume),
        math.sqrt(l2_norm(state.C1) ** 2 + l2_norm(state.C2) ** 2),
        psi_vs_u1(state, u1_0),
        float(np.min(jac.determinant())),
    )


class CoordRun(NamedTuple):
    rows: List[CoordRow]
    final: CoordState

    def g_constant(self, eps: float) -> float:
        """Largest rms g <t>^2 / eps over the rows."""
        return max(row.g * (1.0 + row.t * row.t) / eps for row in self.rows)


def coord_series(
    state: CoordState,
    feed: U0Feed,
    tmax: float,
    dt: float,
    every: int = 1,
    laplacian_kind: Laplacian = Laplacian.TILDE,
) -> CoordRun:
    steps = int(math.ceil((tmax - state.t) / dt - 1e-9))
    debug_print(f"coords: nu={state.nu} dt={dt} steps={steps} laplacian={laplacian_kind.value}")
    rows = [coord_row(state, feed)]
    for n in tqdm(range(1, steps + 1), unit="step", desc="evolving coords", disable=disable_tqdm()):
        state = evolve_coord(state, feed, min(dt, tmax - state.t), laplacian_kind)
        if n % every == 0 or n == steps:
            rows.append(coord_row(state, feed))
    return CoordRun(rows, state)
