import math
from typing import List, Sequence

import pytest

from couettelab.cl_types import Classification
from couettelab.dns import DnsRow
from couettelab.xrun.classify import classify_run, is_stable
from couettelab.xrun.exceptions import TruncatedSeriesError


def series(
    energy: Sequence[float], energy_nonzero: Sequence[float], u1_zero: Sequence[float]
) -> List[DnsRow]:
    return [
        DnsRow(float(t), e, enz, 0.0, u1, 0.0, 0.0, 0.0)
        for t, (e, enz, u1) in enumerate(zip(energy, energy_nonzero, u1_zero))
    ]


def test_blow_up_passes_through() -> None:
    assert classify_run([], 10.0, blow_up_time=3.0) is Classification.BLOW_UP_EVENT


def test_truncated() -> None:
    with pytest.raises(TruncatedSeriesError):
        classify_run([], 10.0)

    rows = series([1.0] * 4, [1.0] * 4, [0.1] * 4)
    with pytest.raises(TruncatedSeriesError) as excinfo:
        classify_run(rows, 10.0)
    assert excinfo.value.t_end == 3.0
    assert classify_run(rows, 3.0) is Classification.RELAMINARIZING


def test_relaminarizing() -> None:
    rows = series([1.0, 0.1, 1e-3], [1.0, 0.1, 1e-3], [0.1, 0.1, 0.1])
    assert classify_run(rows) is Classification.RELAMINARIZING


def test_zero_energy() -> None:
    rows = series([0.0, 0.0], [0.0, 0.0], [0.0, 0.0])
    assert classify_run(rows) is Classification.RELAMINARIZING


def test_rebound_escapes() -> None:
    rows = series([1.0] * 4, [1.0, 2.0, 0.1, 1.5], [0.1] * 4)
    assert classify_run(rows) is Classification.NONLINEAR_ESCAPE


def test_growth_at_end_escapes() -> None:
    rows = series([1.0, 5.0, 20.0], [1.0, 5.0, 20.0], [0.1, 0.1, 0.1])
    assert classify_run(rows) is Classification.NONLINEAR_ESCAPE


def test_streak_dominated() -> None:
    rows = series([1.0, 1.0], [1.0, 1e-5], [0.1, 1.0])
    assert classify_run(rows) is Classification.STREAK_DOMINATED


def test_slow_decay_with_growing_streak() -> None:
    rows = series([1.0, 1.0, 1.0], [1.0, 0.5, 0.2], [0.1, 0.5, 1.0])
    assert classify_run(rows) is Classification.STREAK_DOMINATED


def test_slow_decay_without_streak() -> None:
    rows = series([1.0, 0.5], [1.0, 0.5], [0.1, 0.1])
    assert classify_run(rows) is Classification.RELAMINARIZING


def test_is_stable() -> None:
    assert is_stable(Classification.RELAMINARIZING)
    assert is_stable(Classification.STREAK_DOMINATED)
    assert not is_stable(Classification.NONLINEAR_ESCAPE)
    assert not is_stable(Classification.BLOW_UP_EVENT)


def test_linear_shaped_series_is_streak_dominated() -> None:
    times = [float(t) for t in range(31)]
    e_nonzero = [math.exp(-1e-3 * t**3) for t in times]
    u1_zero = [0.1 + t for t in times]
    rows = [
        DnsRow(t, enz + u1 * u1, enz, u1 * u1, u1, 0.0, 0.0, 0.0)
        for t, enz, u1 in zip(times, e_nonzero, u1_zero)
    ]
    assert classify_run(rows, 30.0) is Classification.STREAK_DOMINATED


def test_injected_rebound_escapes() -> None:
    e_nonzero = [1.0, 0.5, 0.1, 0.05, 0.2, 1.0]
    rows = series([1.0] * 6, e_nonzero, [0.1] * 6)
    assert classify_run(rows) is Classification.NONLINEAR_ESCAPE
