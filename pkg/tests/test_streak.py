import math

import numpy as np
import pytest

from couettelab.cl_types import Frame
from couettelab.exceptions import GridSpecError
from couettelab.grid import GridSpec, PlaneSpec, SpectralField, from_physical, l2_norm, to_physical
from couettelab.streak import (
    STREAK_HEADER,
    StreakState,
    shear_layer,
    streak_rhs,
    streak_series,
    streak_step,
    streak_trajectory,
    taylor_green,
    velocity_from_vorticity,
)

PLANE = PlaneSpec(16, 16)


def test_velocity_recovers_vorticity() -> None:
    y, z = PLANE.physical_mesh()
    omega = from_physical(PLANE, np.cos(y) * np.sin(2 * z), Frame.LAB)
    u2, u3 = velocity_from_vorticity(omega)
    eta, l = PLANE.mesh()
    assert np.allclose(1j * eta * u3.coeffs - 1j * l * u2.coeffs, omega.coeffs)
    assert np.allclose(1j * eta * u2.coeffs + 1j * l * u3.coeffs, 0.0)


def test_shear_layer_velocity() -> None:
    state = shear_layer(PLANE, 1e-3)
    _, z = PLANE.physical_mesh()
    u1, u2, u3 = state.velocity()
    assert np.allclose(to_physical(u2), 1e-3 * np.sin(z))
    assert np.allclose(to_physical(u3), 0.0)
    assert np.allclose(to_physical(u1), 0.0)


def test_from_velocity_needs_plane() -> None:
    grid = GridSpec(4, 4, 4)
    field = SpectralField(grid.zeros(), grid, Frame.LAB)
    with pytest.raises(GridSpecError):
        StreakState.from_velocity(field, field, field)


def test_rhs_without_cross_flow_is_diffusion() -> None:
    y, z = PLANE.physical_mesh()
    zero = SpectralField(PLANE.zeros(), PLANE, Frame.LAB)
    u1 = from_physical(PLANE, np.cos(z), Frame.LAB)
    state = StreakState(zero, u1, 0.0, 0.1)
    d_omega, d_u1 = streak_rhs(state)
    assert np.allclose(d_omega.coeffs, 0.0)
    assert np.allclose(to_physical(d_u1), -0.1 * np.cos(z))


def test_shear_layer_rhs() -> None:
    _, z = PLANE.physical_mesh()
    d_omega, d_u1 = streak_rhs(shear_layer(PLANE, 1e-3))
    assert np.allclose(d_omega.coeffs, 0.0, atol=1e-15)
    assert np.allclose(to_physical(d_u1), -1e-3 * np.sin(z), atol=1e-15)


def test_shear_layer_lift_up_is_exact() -> None:
    _, z = PLANE.physical_mesh()
    final = streak_trajectory(shear_layer(PLANE, 1e-3), 2.0, 0.05)[-1]
    assert final.t == pytest.approx(2.0)
    assert np.allclose(to_physical(final.u1), -2.0 * 1e-3 * np.sin(z), atol=1e-7)


def test_taylor_green_decay() -> None:
    nu = 0.01
    state = taylor_green(PLANE, 1.0, nu)
    final = streak_trajectory(state, 1.0, 0.05)[-1]
    assert np.allclose(final.omega.coeffs, state.omega.coeffs * math.exp(-2.0 * nu), atol=1e-7)


def test_inviscid_invariants() -> None:
    y, z = PLANE.physical_mesh()
    omega = from_physical(PLANE, 0.1 * (np.cos(y) * np.cos(z) + 0.5 * np.sin(2 * y)), Frame.LAB)
    zero = SpectralField(PLANE.zeros(), PLANE, Frame.LAB)
    state = StreakState(omega, zero, 0.0, 0.0)
    energy = state.kinetic_energy()
    enstrophy = state.enstrophy()
    for _ in range(1000):
        state = streak_step(state, 0.01)
    assert abs(state.kinetic_energy() - energy) <= 1e-8 * energy
    assert abs(state.enstrophy() - enstrophy) <= 1e-8 * enstrophy


def test_viscous_enstrophy_nonincreasing() -> None:
    rows = streak_series(taylor_green(PLANE, 0.5, 0.05), 2.0, 0.1)
    enstrophy = [r.enstrophy for r in rows]
    assert all(b <= a for a, b in zip(enstrophy, enstrophy[1:]))


def test_streak_series_sampling() -> None:
    state = shear_layer(PLANE, 1e-3)
    rows = streak_series(state, 1.0, 0.1, every=3)
    assert len(STREAK_HEADER) == len(rows[0])
    assert [round(r.t, 10) for r in rows] == [0.0, 0.3, 0.6, 0.9, 1.0]
    u2_norm = l2_norm(state.velocity()[1])
    assert rows[-1].u1 == pytest.approx(u2_norm * rows[-1].t)
