import math

import numpy as np
import pytest

from couettelab.cl_types import FitModel
from couettelab.exceptions import FitError, ModeStateError
from couettelab.grid import TWO_PI, GridSpec, VectorField
from couettelab.linear import (
    SERIES_HEADER,
    ModeState,
    coupling_matrix,
    dissipation_integral,
    evolve_mode,
    exact_q2_factor,
    fit_rates,
    inviscid_u2_ratio,
    linear_mode_step,
    linear_series,
    zero_mode_evolution,
)


def test_dissipation_integral() -> None:
    k, eta, l, t = 1.0, 2.0, 1.0, 3.0
    expected = k * k * t + eta * eta * t - eta * k * t * t + k * k * t**3 / 3.0 + l * l * t
    assert dissipation_integral(k, eta, l, t) == pytest.approx(expected)


def test_enhanced_dissipation_factor() -> None:
    nu, t = 1e-3, 20.0
    assert exact_q2_factor(1.0, 0.0, 0.0, nu, t) == pytest.approx(math.exp(-nu * (t + t**3 / 3.0)))


def test_initial_state_is_divergence_free() -> None:
    state = ModeState.initial(1.0, 2.0, -1.0, t=0.5)
    assert state.divergence_defect() < 1e-14
    assert np.allclose(state.q / state.symbol, state.u)


def test_zero_wavenumber_rejected() -> None:
    with pytest.raises(ModeStateError):
        ModeState.initial(0.0, 0.0, 0.0)


def test_step_rejects_nonpositive_dt() -> None:
    state = ModeState.initial(1.0, 0.0, 0.0)
    with pytest.raises(ModeStateError):
        linear_mode_step(state, 0.0, 0.0)


def test_q2_row_is_decoupled() -> None:
    matrix = coupling_matrix(1.0, 3.0, 2.0, 1.5)
    assert np.all(matrix[1] == 0.0)
    assert matrix[0, 0] == matrix[2, 2]


def test_q2_matches_closed_form() -> None:
    k, eta, l, nu = 1.0, 2.0, 1.0, 0.01
    state = ModeState.initial(k, eta, l)
    final = evolve_mode(state, nu, 5.0)
    assert final.t == pytest.approx(5.0)
    ratio = final.q[1] / state.q[1]
    assert abs(ratio - exact_q2_factor(k, eta, l, nu, 5.0)) < 1e-8


def test_inviscid_damping_of_u2() -> None:
    state = ModeState.initial(1.0, 0.0, 0.0)
    final = evolve_mode(state, 0.0, 10.0, dt=0.01)
    expected = 1.0 / (1.0 + 10.0**2)
    assert abs(final.u[1] / state.u[1] - expected) < 1e-8
    assert inviscid_u2_ratio(1.0, 0.0, 0.0, 10.0) == pytest.approx(expected)


def test_divergence_identity_preserved() -> None:
    state = ModeState.initial(1.0, 0.0, 1.0)
    final = evolve_mode(state, 0.0, 10.0, dt=0.01)
    assert final.divergence_defect() < 1e-7 * np.max(np.abs(final.u))


def test_k_zero_matches_zero_mode_evolution() -> None:
    grid = GridSpec(4, 8, 8, ly=TWO_PI)
    coeffs = grid.zeros(3)
    coeffs[:, 0, 1, 1] = (0.2, 0.5, -0.5)
    u_in = VectorField(coeffs, grid)

    exact = zero_mode_evolution(u_in, 0.1, 2.0)
    factor = math.exp(-0.4)
    assert exact.coeffs[0, 0, 1, 1] == pytest.approx(factor * (0.2 - 2.0 * 0.5))
    assert exact.coeffs[1, 0, 1, 1] == pytest.approx(factor * 0.5)
    assert exact.coeffs[2, 0, 1, 1] == pytest.approx(factor * -0.5)

    state = ModeState.initial(0.0, 1.0, 1.0, velocity=(0.2, 0.5, -0.5))
    stepped = evolve_mode(state, 0.1, 2.0, dt=0.01)
    assert np.allclose(stepped.u, exact.coeffs[:, 0, 1, 1], atol=1e-10)


def test_zero_mode_lift_up_is_linear() -> None:
    grid = GridSpec(4, 8, 8, ly=TWO_PI)
    coeffs = grid.zeros(3)
    coeffs[1, 0, 1, 0] = 0.3
    u_in = VectorField(coeffs, grid)
    for t in (1.0, 2.0, 4.0):
        out = zero_mode_evolution(u_in, 0.0, t)
        assert out.coeffs[0, 0, 1, 0] == pytest.approx(-0.3 * t)


def test_zero_mode_rejects_x_dependence() -> None:
    grid = GridSpec(4, 8, 8)
    coeffs = grid.zeros(3)
    coeffs[1, 1, 1, 0] = 1.0
    with pytest.raises(ModeStateError):
        zero_mode_evolution(VectorField(coeffs, grid), 0.0, 1.0)


def test_linear_series_rows() -> None:
    state = ModeState.initial(1.0, 0.0, 0.0)
    rows = linear_series(state, 0.0, 1.0, dt=0.1, every=2)
    assert len(SERIES_HEADER) == len(rows[0])
    assert [round(r.t, 10) for r in rows] == [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    assert rows[-1].q2 == pytest.approx(rows[0].q2)


def test_fit_power_law() -> None:
    series = [(t, t**-2.0) for t in np.linspace(1.0, 20.0, 20)]
    fit = fit_rates(series, FitModel.POWER_LAW)
    assert fit.model is FitModel.POWER_LAW
    assert abs(fit.coefficient + 2.0) < 1e-6
    assert fit.residual < 1e-10


def test_fit_cubic_exp() -> None:
    series = [(t, math.exp(-0.01 * t**3)) for t in np.linspace(0.0, 10.0, 21)]
    fit = fit_rates(series, FitModel.CUBIC_EXP)
    assert abs(fit.coefficient + 0.01) < 1e-8


def test_fit_linear_lift_up() -> None:
    grid = GridSpec(4, 8, 8, ly=TWO_PI)
    coeffs = grid.zeros(3)
    coeffs[1, 0, 1, 0] = 0.3
    u_in = VectorField(coeffs, grid)
    u2_norm = math.sqrt(grid.volume) * 0.3
    series = []
    for t in np.linspace(0.0, 10.0, 11):
        out = zero_mode_evolution(u_in, 0.0, float(t))
        series.append((float(t), math.sqrt(grid.volume) * abs(out.coeffs[0, 0, 1, 0])))
    fit = fit_rates(series, FitModel.LINEAR)
    assert abs(fit.coefficient - u2_norm) < 1e-10


def test_fit_needs_samples() -> None:
    with pytest.raises(FitError):
        fit_rates([(1.0, 1.0)] * 7, FitModel.LINEAR)


def test_fit_rejects_nonpositive_values() -> None:
    series = [(float(t), 1.0 - t) for t in range(10)]
    with pytest.raises(FitError):
        fit_rates(series, FitModel.POWER_LAW)
