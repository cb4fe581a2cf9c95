# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from ..cl_types import FitModel, RateKind
from ..config import config
from ..dns import DnsRow, DnsState, run_dns, tau_decay
from ..grid import TWO_PI, l2_norm
from ..linear import fit_rates
from ..streak import shear_layer, streak_series
from ..utils import debug_print
from .runconfig import RunConfig

LIFT_UP_WINDOW = (1.0, 10.0)
LIFT_UP_TOLERANCE = 0.02
DAMPING_TARGET = -2.0
DAMPING_LIMIT = -1.8
DISSIPATION_FACTOR = 1.3


class RateReport(NamedTuple):
    kind: RateKind
    measured: float
    target: float
    low: float
    high: float
    passed: bool
    details: Dict[str, float]
    problems: Tuple[str, ...] = ()

    def rows(self) -> List[Tuple[str, float]]:
        return [("measured", self.measured), ("target", self.target)] + sorted(
            self.details.items()
        )


def lift_up_study(run_config: RunConfig) -> RateReport:
    """Slope of |u1_0| over the lift-up window, in units of |u2_in|."""
    state = shear_layer(run_config.plane(), run_config.eps, run_config.nu)
    u2_in = l2_norm(state.velocity()[1])
    t_lo, t_hi = LIFT_UP_WINDOW
    series = streak_series(state, t_hi, min(run_config.dt, 0.05))
    window = [(r.t, r.u1) for r in series if t_lo - 1e-9 <= r.t <= t_hi + 1e-9]
    fit = fit_rates(window, FitModel.LINEAR)

    measured = fit.coefficient / u2_in
    return RateReport(
        RateKind.LIFT_UP,
        measured,
        1.0,
        1.0 - LIFT_UP_TOLERANCE,
        1.0 + LIFT_UP_TOLERANCE,
        abs(measured - 1.0) <= LIFT_UP_TOLERANCE,
        {"|u2_in|": u2_in, "slope": fit.coefficient, "residual": fit.residual},
    )


def resolved_time(run_config: RunConfig, k: float = 1.0) -> float:
    """Time at which a mode starting at eta = 0 is sheared past the dealiased y band."""
    eta_max = (math.ceil(run_config.dealias * run_config.ny / 2.0) - 1) * TWO_PI / run_config.ly
    return eta_max / k


def inviscid_damping_study(run_config: RunConfig) -> RateReport:
    """Power law of |u2| on the x-dependent mode (1, 0, 0), fitted before it leaves the grid."""
    grid = run_config.grid()
    k = TWO_PI / run_config.lx
    t_hi = min(run_config.tmax, 0.9 * resolved_time(run_config, k))
    t_lo = 0.3 * t_hi

    state = DnsState.single_mode(grid, (1, 0, 0), run_config.eps, run_config.nu)
    run = run_dns(state, t_hi, run_config.dt, remap_periods=run_config.remap_periods)
    fit = fit_rates(
        [(r.t, r.u2_nonzero) for r in run.series if r.t >= t_lo - 1e-9], FitModel.POWER_LAW
    )
    debug_print(f"inviscid damping: window=[{t_lo:.3g}, {t_hi:.3g}] exponent={fit.coefficient}")
    return RateReport(
        RateKind.INVISCID_DAMPING,
        fit.coefficient,
        DAMPING_TARGET,
        -math.inf,
        DAMPING_LIMIT,
        fit.coefficient <= DAMPING_LIMIT,
        {"t_lo": t_lo, "t_hi": t_hi, "residual": fit.residual},
    )


def discarded_share(series: Sequence[DnsRow], tau: Optional[float]) -> float:
    """Remap energy discarded up to tau (or the whole run), relative to E_nonzero(0)."""
    if not series or series[0].energy_nonzero <= 0.0:
        return math.nan
    rows = [r for r in series if tau is not None and r.t >= tau - 1e-9]
    row = rows[0] if rows else series[-1]
    return row.discarded / series[0].energy_nonzero


def enhanced_dissipation_study(run_config: RunConfig) -> RateReport:
    """tau_100 at nu against tau_100 at 10 nu; the nu^(-1/3) law predicts 10^(1/3).

    A tau is only trusted when the remaps have discarded less than remap_loss_limit of the
    initial x-dependent energy by then; otherwise the grid is too coarse in y.
    """
    details: Dict[str, float] = {}
    problems: List[str] = []
    for label, nu in (("nu", run_config.nu), ("10 nu", 10.0 * run_config.nu)):
        state = DnsState.random(
            run_config.grid(),
            run_config.eps,
            run_config.seed,
            run_config.lambda_0,
            run_config.s,
            nu,
        )
        run = run_dns(state, run_config.tmax, run_config.dt, remap_periods=run_config.remap_periods)
        tau = tau_decay(run.series, 100.0)
        share = discarded_share(run.series, tau)
        details[f"tau({label})"] = math.nan if tau is None else tau
        details[f"discarded({label})"] = share
        if not share <= config.remap_loss_limit:
            problems.append(
                f"remaps discarded {share:.3g} of E_nonzero(0) at {label}, "
                f"limit {config.remap_loss_limit:g}"
            )

    target = 10.0 ** (1.0 / 3.0)
    measured = details["tau(nu)"] / details["tau(10 nu)"]
    low, high = target / DISSIPATION_FACTOR, target * DISSIPATION_FACTOR
    debug_print(f"enhanced dissipation: ratio={measured} {details}")
    return RateReport(
        RateKind.ENHANCED_DISSIPATION,
        measured,
        target,
        low,
        high,
        low <= measured <= high and not problems,
        details,
        tuple(problems),
    )


STUDIES = {
    RateKind.LIFT_UP: lift_up_study,
    RateKind.INVISCID_DAMPING: inviscid_damping_study,
    RateKind.ENHANCED_DISSIPATION: enhanced_dissipation_study,
}


def rate_study(kind: RateKind, run_config: RunConfig) -> RateReport:
    return STUDIES[kind](run_config)
