import math
import os

import numpy as np
import pytest
from scipy.integrate import simpson

from couettelab.cl_types import Frame
from couettelab.coords import CoordState, ZeroFeed, evolve_coord
from couettelab.dns import (
    DNS_HEADER,
    DnsForcingFeed,
    DnsRow,
    DnsState,
    divergence_max,
    dns_rhs,
    dns_row,
    dns_step,
    embed_plane,
    energy,
    energy_nonzero,
    energy_zero,
    forcing_functional,
    load_checkpoint,
    mode_energies,
    norm_series,
    project_plane,
    q_fields,
    run_dns,
    save_checkpoint,
    tau_decay,
    velocity_forcing,
)
from couettelab.exceptions import CflError, GridSpecError, ProfileRangeError
from couettelab.grid import (
    GridSpec,
    PlaneSpec,
    SpectralField,
    from_physical,
    hermitian_defect,
    l2_norm,
)
from couettelab.linear import ModeState, evolve_mode
from couettelab.multiplier import NormParams, ProfileBank
from couettelab.streak import StreakState, streak_rhs, streak_trajectory, taylor_green
from couettelab.utils import read_csv

GRID = GridSpec(8, 16, 8)


def test_zero_field_has_zero_rhs() -> None:
    state = DnsState.zeros(GRID)
    assert np.all(dns_rhs(state).coeffs == 0.0)


def test_random_state() -> None:
    state = DnsState.random(GRID, 1e-3, seed=4)
    assert l2_norm(state.u) / math.sqrt(GRID.volume) == pytest.approx(1e-3)
    assert divergence_max(state) < 1e-15
    assert hermitian_defect(state.u) < 1e-12
    assert np.all(state.u.coeffs[:, ~GRID.dealias_mask] == 0.0)
    again = DnsState.random(GRID, 1e-3, seed=4)
    assert np.array_equal(state.u.coeffs, again.u.coeffs)


def test_x_independent_rhs_matches_streak() -> None:
    plane = GRID.plane()
    y, z = plane.physical_mesh()
    tg = taylor_green(plane, 0.5)
    u1 = from_physical(plane, 0.3 * np.cos(z) + 0.2 * np.sin(y) * np.cos(z), Frame.LAB)
    streak = StreakState(tg.omega, u1, 0.0, 0.0)

    state = DnsState(embed_plane(GRID, *streak.velocity()), 0.0, 0.0)
    rhs = dns_rhs(state).coeffs[:, 0]
    d_omega, d_u1 = streak_rhs(streak)

    eta, l = plane.mesh()
    assert np.allclose(rhs[0], d_u1.coeffs, atol=1e-12)
    assert np.allclose(1j * eta * rhs[2] - 1j * l * rhs[1], d_omega.coeffs, atol=1e-12)
    assert np.allclose(dns_rhs(state).coeffs[:, 1:], 0.0, atol=1e-14)


def test_tiny_mode_follows_linear_dynamics() -> None:
    nu = 0.01
    state = DnsState.single_mode(GRID, (1, 2, 1), 1e-8, nu)
    u0 = state.u.coeffs[:, 1, 2, 1]
    run = run_dns(state, 5.0, 0.05, remap_periods=20)

    k, eta, l = (float(m.ravel()[i]) for m, i in zip(GRID.mesh(), (1, 2, 1)))
    linear = evolve_mode(ModeState.initial(k, eta, l, velocity=u0), nu, 5.0, dt=0.05)
    u_dns = run.final.u.coeffs[:, 1, 2, 1]
    assert run.final.t == pytest.approx(5.0)
    assert np.linalg.norm(u_dns - linear.u) <= 1e-4 * np.linalg.norm(linear.u)


def test_step_keeps_divergence_free() -> None:
    state = DnsState.random(GRID, 1e-2, seed=1, nu=1e-2)
    for _ in range(5):
        state = dns_step(state, 0.05)
    assert divergence_max(state) < 1e-12
    assert state.t == pytest.approx(0.25)


def test_remap_at_aligned_time() -> None:
    state = DnsState.random(GRID, 1e-4, seed=2, nu=1e-2)
    run = run_dns(state, 1.2, 0.1, remap_periods=2)
    assert run.final.u.t_remap == pytest.approx(1.0)
    assert any(event.startswith("remap at t=1") for event in run.events)
    assert not run.blew_up


def test_cfl_retries_exhausted() -> None:
    state = DnsState.single_mode(GRID, (1, 1, 1), 1e6)
    with pytest.raises(CflError):
        dns_step(state, 1.0)


def test_energy_split() -> None:
    state = DnsState.random(GRID, 1e-3, seed=5)
    assert energy_nonzero(state) + energy_zero(state) == pytest.approx(energy(state))
    assert sum(mode_energies(state).values()) == pytest.approx(energy(state))
    assert set(mode_energies(state)) == {0, 1, 2, 3, 4}


def test_q_fields_single_mode() -> None:
    state = DnsState.single_mode(GRID, (1, 2, 1), 1.0)
    q = q_fields(state)
    k, eta, l = (float(m.ravel()[i]) for m, i in zip(GRID.mesh(), (1, 2, 1)))
    symbol = -(k * k + eta * eta + l * l)
    assert np.allclose(q.coeffs[:, 1, 2, 1], symbol * state.u.coeffs[:, 1, 2, 1])


def test_forcing_vanishes_without_x_dependence() -> None:
    plane = GRID.plane()
    tg = taylor_green(plane, 0.5)
    state = DnsState(embed_plane(GRID, *tg.velocity()), 0.0, 0.0)
    for alpha in (1, 2, 3):
        assert np.all(forcing_functional(state, alpha).coeffs == 0.0)
        assert np.allclose(velocity_forcing(state, alpha).coeffs, 0.0)


def test_forcing_from_x_dependent_pair() -> None:
    state = DnsState.random(GRID, 1e-2, seed=8)
    forcing = velocity_forcing(state, 2)
    assert isinstance(forcing.grid, PlaneSpec)
    assert np.any(forcing.coeffs != 0.0)
    v2, v3 = project_plane([velocity_forcing(state, 2), velocity_forcing(state, 3)])
    eta, l = forcing.grid.mesh()
    assert np.allclose(eta * v2.coeffs + l * v3.coeffs, 0.0, atol=1e-18)


def test_forcing_functional_matches_projected_velocity_forcing() -> None:
    state = DnsState.random(GRID, 1e-2, seed=5)
    plane = GRID.plane()
    eta, l = plane.mesh()
    k_sq = eta * eta + l * l
    v1 = velocity_forcing(state, 1)
    v2, v3 = project_plane([velocity_forcing(state, 2), velocity_forcing(state, 3)])
    for alpha, v in zip((1, 2, 3), (v1, v2, v3)):
        expected = -k_sq * v.coeffs
        scale = float(np.max(np.abs(expected)))
        assert scale > 0.0
        assert np.allclose(
            forcing_functional(state, alpha).coeffs, expected, rtol=0.0, atol=1e-10 * scale
        )


def test_streak_data_follows_streak_system() -> None:
    plane = GRID.plane()
    y, z = plane.physical_mesh()
    tg = taylor_green(plane, 0.5, nu=1e-2)
    u1 = from_physical(plane, 0.3 * np.cos(z) + 0.2 * np.sin(y) * np.cos(z), Frame.LAB)
    streak = StreakState(tg.omega, u1, 0.0, 1e-2)

    state = DnsState(embed_plane(GRID, *streak.velocity()), 0.0, 1e-2)
    for _ in range(100):
        state = dns_step(state, 0.005)
    final = streak_trajectory(streak, 0.5, 0.005)[-1]

    assert state.t == pytest.approx(final.t)
    for i, expected in enumerate(final.velocity()):
        scale = float(np.max(np.abs(expected.coeffs)))
        assert np.allclose(state.u.coeffs[i, 0], expected.coeffs, rtol=0.0, atol=1e-6 * scale)
    assert np.allclose(state.u.coeffs[:, 1:], 0.0, atol=1e-14)


def _u1_u2(state: DnsState) -> float:
    coeffs = state.u.coeffs
    return state.grid.volume * float(np.sum(np.real(np.conj(coeffs[0]) * coeffs[1])))


def test_inviscid_energy_change_is_the_shear_production() -> None:
    # dE/dt = -<u1, u2> when nu = 0; no remap happens before t = 1
    state = DnsState.random(GRID, 1e-2, seed=4)
    e0 = energy(state)
    times = [state.t]
    production = [_u1_u2(state)]
    for _ in range(50):
        state = dns_step(state, 0.01)
        times.append(state.t)
        production.append(_u1_u2(state))

    assert state.discarded_energy == 0.0
    change = energy(state) - e0
    assert change == pytest.approx(-simpson(production, x=times), rel=1e-4)


def test_forcing_feed_drives_coordinate_change() -> None:
    states = [DnsState.random(GRID, 1e-2, seed=9)]
    for _ in range(2):
        states.append(dns_step(states[-1], 0.1))
    feed = DnsForcingFeed(states)
    first = velocity_forcing(states[0], 1).coeffs
    last = velocity_forcing(states[-1], 1).coeffs
    assert np.array_equal(feed(0.0).coeffs, first)
    assert np.allclose(feed(0.05).coeffs, 0.5 * (first + velocity_forcing(states[1], 1).coeffs))
    assert np.array_equal(feed(5.0).coeffs, last)
    with pytest.raises(GridSpecError):
        DnsForcingFeed([])

    plane = GRID.plane()
    zero = SpectralField(plane.zeros(), plane, Frame.LAB)
    state = CoordState(zero, zero, zero, 1.0)
    unforced = evolve_coord(state, ZeroFeed(plane), 0.1)
    forced = evolve_coord(state, ZeroFeed(plane), 0.1, forcing=feed)
    assert np.all(unforced.g.coeffs == 0.0)
    assert np.any(forced.g.coeffs != 0.0)


def test_embed_plane_checks_grid() -> None:
    plane = PlaneSpec(8, 8)
    field = SpectralField(plane.zeros(), plane, Frame.LAB)
    with pytest.raises(GridSpecError):
        embed_plane(GRID, field, field, field)


def _row(t: float, e: float) -> DnsRow:
    return DnsRow(t, e, e, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_tau_decay() -> None:
    series = [_row(float(t), 10.0 ** (-t)) for t in range(5)]
    assert tau_decay(series, 100.0) == pytest.approx(2.0)
    assert tau_decay(series[:2], 100.0) is None
    assert tau_decay([], 100.0) is None


def test_run_dns_writes_outputs(tmp_path) -> None:
    out_dir = str(tmp_path)
    state = DnsState.random(GRID, 1e-4, seed=3, nu=1e-2)
    run = run_dns(state, 0.2, 0.1, out_dir, "abc123", snapshot_every=1)
    rows = read_csv(os.path.join(out_dir, "series.csv"))
    assert rows[0] == DNS_HEADER
    assert len(rows) == 4
    assert os.path.exists(os.path.join(out_dir, "snapshots", "000002_u3.c3df"))
    assert len(run.series[-1]) == len(dns_row(run.final))

    resumed = load_checkpoint(out_dir, GRID, 1e-2, "abc123")
    assert resumed is not None
    assert resumed.t == pytest.approx(0.2)
    assert np.array_equal(resumed.u.coeffs, run.final.u.coeffs)
    assert load_checkpoint(out_dir, GRID, 1e-2, "other") is None


def test_run_dns_resumes_in_place(tmp_path) -> None:
    out_dir = str(tmp_path)
    state = DnsState.random(GRID, 1e-4, seed=3, nu=1e-2)
    run_dns(state, 0.2, 0.1, out_dir, "abc123", snapshot_every=1)
    resumed = run_dns(state, 0.4, 0.1, out_dir, "abc123", snapshot_every=1)

    assert resumed.events[0] == "resumed at t=0.2"
    assert [row.t for row in resumed.series] == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4])
    rows = read_csv(os.path.join(out_dir, "series.csv"))
    assert len(rows) == 6
    assert float(rows[3][0]) == pytest.approx(0.2)
    assert not os.path.exists(os.path.join(out_dir, "series-2.csv"))
    assert os.path.exists(os.path.join(out_dir, "snapshots", "000004_u1.c3df"))


def test_checkpoint_round_trip(tmp_path) -> None:
    state = DnsState.random(GRID, 1e-3, seed=6)
    save_checkpoint(str(tmp_path), state, "hash")
    loaded = load_checkpoint(str(tmp_path), GRID, 0.0, "hash")
    assert loaded is not None
    assert np.array_equal(loaded.u.coeffs, state.u.coeffs)


def test_norm_series() -> None:
    state = DnsState.random(GRID, 1e-2, 3)
    params = NormParams()
    record = norm_series(state, params, ProfileBank(params.kappa, 10.0))
    assert record.t == 0.0
    assert all(math.isfinite(v) for v in record.log_A + record.log_A_nu)
    assert record.energy_nonzero == pytest.approx(energy_nonzero(state))
    assert set(record.mode_energies) == set(mode_energies(state))

    with pytest.raises(ProfileRangeError):
        norm_series(state, params, ProfileBank(params.kappa, 1.0))
