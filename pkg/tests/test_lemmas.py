import math

import numpy as np
import pytest

from couettelab.exceptions import UnknownLemmaError
from couettelab.lemmas import (
    LEMMAS,
    Box,
    box_doubling,
    draw_samples,
    in_resonant_interval,
    resonant_times,
    verify_lemma,
)
from couettelab.multiplier import NormParams

SMALL_BOX = Box(k_max=4, eta_max=64.0, l_max=4, t_min=1.0, t_max=128.0)
SAMPLES = 600


def test_lemma_registry() -> None:
    assert set(LEMMAS) == {
        "ABasic12",
        "dtwBasicBrack",
        "basicNR",
        "TriTriv",
        "ratlongtime",
        "dtw",
        "wRat",
        "Jswap",
        "totalGrowthw",
        "wellsep",
    }


def test_unknown_lemma() -> None:
    with pytest.raises(UnknownLemmaError):
        verify_lemma("noSuchLemma", SMALL_BOX, SAMPLES)


def test_box_doubled() -> None:
    doubled = Box().doubled()
    assert (doubled.k_max, doubled.eta_max, doubled.l_max) == (16, 512.0, 16)
    assert doubled.t_min == 1.0
    assert doubled.t_max == 1024.0
    assert "|eta|<=512" in str(doubled)


def test_draw_samples_is_seeded() -> None:
    a = draw_samples(SMALL_BOX, 100, 7)
    b = draw_samples(SMALL_BOX, 100, 7)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert np.all(np.abs(a.eta) <= SMALL_BOX.eta_max)
    assert np.all((a.t >= SMALL_BOX.t_min) & (a.t <= SMALL_BOX.t_max))
    # first third sits on xi = eta
    assert np.array_equal(a.xi[:33], a.eta[:33])


def test_resonant_times() -> None:
    times = resonant_times(100.0)
    assert len(times) == 10
    assert times[0] == pytest.approx(75.0)
    assert times[1] == pytest.approx(41.6667, abs=1e-4)
    assert resonant_times(0.5) == ()


def test_in_resonant_interval() -> None:
    assert in_resonant_interval(np.array(80.0), np.array(1), np.array(100.0))
    assert not in_resonant_interval(np.array(80.0), np.array(-1), np.array(100.0))
    assert not in_resonant_interval(np.array(80.0), np.array(2), np.array(100.0))


def test_tri_triv_bounded_by_one() -> None:
    report = verify_lemma("TriTriv", SMALL_BOX, SAMPLES)
    assert report["lemma_id"] == "TriTriv"
    assert report["samples"] == SAMPLES
    assert report["log_max_ratio"] <= 1e-12
    assert set(report["argmax"]) == {"k", "k_prime", "eta", "xi", "l", "l_prime", "t"}


def test_every_lemma_has_finite_constant() -> None:
    params = NormParams()
    for lemma_id in LEMMAS:
        report = verify_lemma(lemma_id, SMALL_BOX, SAMPLES, params)
        assert not math.isnan(report["log_max_ratio"])
        assert report["log_max_ratio"] < 700.0


def test_box_doubling_stays_bounded() -> None:
    for lemma_id in ("TriTriv", "ratlongtime"):
        result = box_doubling(lemma_id, SMALL_BOX, SAMPLES)
        assert result.doubled["box"] == str(SMALL_BOX.doubled())
        assert result.growth < 2.0
