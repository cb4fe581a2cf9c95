# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

from typing import Optional, Sequence

from typing_extensions import Protocol

from ..cl_types import Classification
from ..config import config
from ..utils import debug_print
from .exceptions import TruncatedSeriesError

# Tolerance on the end time of a series
T_SLACK = 1e-9


class EnergyRow(Protocol):
    """What a series row must carry; dns.DnsRow satisfies it."""

    @property
    def t(self) -> float: ...

    @property
    def energy(self) -> float: ...

    @property
    def energy_nonzero(self) -> float: ...

    @property
    def u1_zero(self) -> float: ...


def classify_run(
    series: Sequence[EnergyRow],
    t_required: Optional[float] = None,
    blow_up_time: Optional[float] = None,
) -> Classification:
    """Classify a run by the shape of its energy series.

    Rules, in order: a blow-up passes through; total energy below relaminar_energy of
    its initial value relaminarizes; E_nonzero climbing escape_rebound times above its
    post-peak minimum escapes; E_nonzero falling below streak_decay of its peak while
    |u1_0| grows streak_growth times is streak-dominated.

    Runs none of these settle fall back. E_nonzero still peaking at the end at
    escape_rebound times its start escapes. Otherwise a grown |u1_0| is streak-dominated
    and anything else relaminarizes.
    """
    if blow_up_time is not None:
        return Classification.BLOW_UP_EVENT
    if not series:
        raise TruncatedSeriesError(float("nan"), t_required or 0.0)
    if t_required is not None and series[-1].t < t_required - T_SLACK:
        raise TruncatedSeriesError(series[-1].t, t_required)

    first, last = series[0], series[-1]
    if first.energy <= 0.0 or last.energy < config.relaminar_energy * first.energy:
        return Classification.RELAMINARIZING

    e_nonzero = [row.energy_nonzero for row in series]
    peak = max(range(len(e_nonzero)), key=e_nonzero.__getitem__)
    trough = e_nonzero[peak]
    rebound = 0.0
    for value in e_nonzero[peak:]:
        trough = min(trough, value)
        if trough > 0.0:
            rebound = max(rebound, value / trough)
    debug_print(f"classify: peak={e_nonzero[peak]:.3e} at t={series[peak].t} rebound={rebound:.3g}")
    if rebound >= config.escape_rebound:
        return Classification.NONLINEAR_ESCAPE

    decayed = e_nonzero[-1] < config.streak_decay * e_nonzero[peak]
    grown = last.u1_zero >= config.streak_growth * first.u1_zero and last.u1_zero > 0.0
    if decayed and grown:
        return Classification.STREAK_DOMINATED

    if peak == len(e_nonzero) - 1 and e_nonzero[-1] >= config.escape_rebound * e_nonzero[0]:
        return Classification.NONLINEAR_ESCAPE
    if grown:
        return Classification.STREAK_DOMINATED
    return Classification.RELAMINARIZING


def is_stable(classification: Classification) -> bool:
    return classification in (Classification.RELAMINARIZING, Classification.STREAK_DOMINATED)
