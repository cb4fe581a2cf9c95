# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

"""Six-amplitude model of the resonant (k) and non-resonant (k') interactions
near the critical time t = eta/k, with its two candidate super-solutions.

Amplitude order: Q2_k, Q2_kp, Q3_kp, Q3_k, Q2_0, Q3_0.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from colorama import Fore
from scipy.integrate import solve_ivp

from .cl_types import FitModel, Kp, ToyVariant
from .config import config
from .constants import WARNING
from .exceptions import FitError, MultiplierDomainError
from .multiplier import critical_time, log_w
from .utils import cl_tqdm_write, debug_print

AMPLITUDES = ("Q2_k", "Q2_kp", "Q3_kp", "Q3_k", "Q2_0", "Q3_0")
Q2_K, Q2_KP, Q3_KP, Q3_K, Q2_0, Q3_0 = range(6)


def toy_interval(k: int, eta: float) -> Tuple[float, float]:
    """Critical interval I_{k,eta} = [t_{k,eta}, t_{k-1,eta}]."""
    t_left = critical_time(k, eta)
    t_right = critical_time(k - 1, eta) if k > 1 else 2.0 * abs(eta)
    return t_left, t_right


def default_k_prime(k: int) -> int:
    return k - 1 if k > 1 else k + 1


@dataclass(frozen=True)
class ToyState:
    k: int
    kp: int
    eta: float
    amplitudes: np.ndarray
    t: float
    l: float = 0.0

    def __post_init__(self) -> None:
        if self.k < 1 or self.eta <= 0:
            raise MultiplierDomainError(self.k, self.eta)
        if self.kp == self.k:
            raise MultiplierDomainError(self.kp, self.eta)

    @classmethod
    def initial(
        cls,
        k: int,
        eta: float,
        kp: Optional[int] = None,
        amplitudes: Optional[Sequence[complex]] = None,
        t: Optional[float] = None,
    ) -> "ToyState":
        """Unit amplitudes at the left end of I_{k,eta} unless given."""
        amps = np.ones(6, dtype=complex) if amplitudes is None else np.asarray(amplitudes, complex)
        t0 = toy_interval(k, eta)[0] if t is None else t
        return cls(k, default_k_prime(k) if kp is None else kp, eta, amps, t0)


@dataclass(frozen=True)
class ToyParams:
    eps: float
    nu: float
    c0: float = 0.0
    alpha: float = 10.0
    dissipation: Kp = Kp.AS_PRINTED


def _jap(*values: float) -> float:
    return math.sqrt(1.0 + sum(v * v for v in values))


def toy_rhs(state: ToyState, t: float, amplitudes: np.ndarray, params: ToyParams) -> np.ndarray:
    k, kp, eta = state.k, state.kp, state.eta
    eps, nu = params.eps, params.nu
    q = amplitudes
    dist = abs(eta - k * t)
    coupling = k / (k + dist)
    forcing = max(eps * t, params.c0)
    damp = _jap(nu * t**3) ** (-params.alpha)
    res_sq = k * k + dist * dist

    diss_k = nu * res_sq
    # the switch only touches the Q2_kp equation
    if params.dissipation is Kp.PRIMED:
        diss_kp = nu * (kp * kp + (eta - kp * t) ** 2)
    else:
        diss_kp = diss_k
    diss_0 = nu * eta * eta

    out = np.empty(6, dtype=complex)
    out[Q2_K] = forcing * coupling * q[Q3_K] - diss_k * q[Q2_K]
    out[Q2_KP] = forcing * kp / _jap(kp, t) * q[Q3_KP] - diss_kp * q[Q2_KP]
    out[Q3_KP] = eps * t**3 * damp * q[Q2_K] / res_sq - diss_k * q[Q3_KP]
    out[Q3_K] = coupling * (q[Q3_K] + q[Q2_K]) - diss_k * q[Q3_K]
    out[Q2_0] = eps * q[Q3_0] + eps * t**2 * damp * q[Q2_K] / res_sq - diss_0 * q[Q2_0]
    out[Q3_0] = eps * q[Q3_0] + eps * t**3 * damp * q[Q2_K] / res_sq - diss_0 * q[Q3_0]
    return out


def resonant_growth_exponent(k: int, eta: float, t: float) -> float:
    """Antiderivative of k/(k + |eta - k t|), zero at t = eta/k."""
    return math.copysign(1.0, t - eta / k) * math.log((k + abs(eta - k * t)) / k)


def exact_q3_resonant(state: ToyState, t: float) -> complex:
    """Q3_k at eps = nu = c0 = 0, where Q2_k is constant and Q3_k + Q2_k grows exponentially."""
    q2 = state.amplitudes[Q2_K]
    q3 = state.amplitudes[Q3_K]
    growth = resonant_growth_exponent(state.k, state.eta, t) - resonant_growth_exponent(
        state.k, state.eta, state.t
    )
    return complex((q3 + q2) * math.exp(growth) - q2)


@dataclass(frozen=True)
class ToyTrajectory:
    state0: ToyState
    params: ToyParams
    t: np.ndarray
    amplitudes: np.ndarray
    blow_up_time: Optional[float] = None

    @property
    def blew_up(self) -> bool:
        return self.blow_up_time is not None

    def final(self) -> ToyState:
        return dataclasses.replace(self.state0, amplitudes=self.amplitudes[:, -1], t=self.t[-1])


class TrajectoryRecord(NamedTuple):
    t: float
    Q2_k: float
    Q2_kp: float
    Q3_kp: float
    Q3_k: float
    Q2_0: float
    Q3_0: float


TRAJECTORY_HEADER = ["t"] + [f"|{name}|" for name in AMPLITUDES]


def trajectory_records(trajectory: ToyTrajectory) -> List[TrajectoryRecord]:
    mags = np.abs(trajectory.amplitudes)
    return [
        TrajectoryRecord(float(t), *map(float, mags[:, i])) for i, t in enumerate(trajectory.t)
    ]


def integrate_toy(
    state0: ToyState,
    params: ToyParams,
    t_span: Optional[Tuple[float, float]] = None,
    t_eval: Optional[np.ndarray] = None,
    rtol: Optional[float] = None,
) -> ToyTrajectory:
    """Adaptive DOP853 integration; stops at the first amplitude blow-up."""
    t0, t1 = t_span or (state0.t, toy_interval(state0.k, state0.eta)[1])
    rtol = rtol or config.toy_rtol
    scale = max(float(np.max(np.abs(state0.amplitudes))), 1.0)
    log_limit = math.log(config.toy_blowup_factor * scale)

    def blow_up(t: float, y: np.ndarray) -> float:
        return math.log(max(float(np.max(np.abs(y))), 1e-300)) - log_limit

    blow_up.terminal = True  # type: ignore[attr-defined]
    blow_up.direction = 1.0  # type: ignore[attr-defined]

    debug_print(
        f"toy: k={state0.k} kp={state0.kp} eta={state0.eta} eps={params.eps} nu={params.nu} "
        f"t=[{t0}, {t1}]"
    )
    sol = solve_ivp(
        lambda t, y: toy_rhs(state0, t, y, params),
        (t0, t1),
        state0.amplitudes.astype(complex),
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=rtol * 1e-3 * scale,
        events=blow_up,
    )

    blow_up_time = None
    if sol.status == 1 and len(sol.t_events[0]):
        blow_up_time = float(sol.t_events[0][0])
        cl_tqdm_write(
            f"{WARNING} Toy blow-up at t={blow_up_time:.6g} "
            f"(k={state0.k}, eta={state0.eta}, eps={params.eps:.3g}, "
            f"nu={params.nu:.3g}){Fore.RESET}"
        )

    return ToyTrajectory(
        dataclasses.replace(state0, t=t0), params, sol.t, sol.y, blow_up_time
    )


@dataclass(frozen=True)
class SuperSolution:
    variant: ToyVariant
    k: int
    kp: int
    eta: float
    kappa: float = 8.0

    def log_envelope(self, t: np.ndarray) -> np.ndarray:
        """log of the envelope for each amplitude, shape (6, len(t))."""
        t = np.asarray(t, dtype=float)
        lw = log_w(t, self.eta, self.kappa)
        log_t = np.log(t)
        env = np.empty((6,) + t.shape)
        if self.variant is ToyVariant.BALANCED:
            env[[Q2_K, Q2_KP, Q2_0]] = lw
            env[[Q3_KP, Q3_K, Q3_0]] = log_t + lw
        else:
            gain = log_t - np.log(abs(self.k) + np.abs(self.eta - self.k * t))
            env[[Q2_K, Q2_KP, Q3_K, Q2_0]] = lw
            env[[Q3_KP, Q3_0]] = gain + lw
        return env

    def w3_nonresonant(self, t: np.ndarray) -> np.ndarray:
        return np.exp(self.log_envelope(t)[Q3_KP])


class DominationReport(NamedTuple):
    dominates: bool
    min_margin: float
    t_violation: Optional[float]
    constant: float


def check_supersolution(
    trajectory: ToyTrajectory, supersolution: SuperSolution, allowance: Optional[float] = None
) -> DominationReport:
    """|Q_i(t)| <= allowance * C * envelope_i(t), C fixed by the ratios at entry."""
    allowance = allowance or config.toy_allowance
    with np.errstate(divide="ignore"):
        log_ratio = np.log(np.abs(trajectory.amplitudes)) - supersolution.log_envelope(
            trajectory.t
        )
    worst = np.max(log_ratio, axis=0)
    log_c = float(worst[0]) if np.isfinite(worst[0]) else 0.0
    margin = math.log(allowance) + log_c - worst

    violations = np.nonzero(margin < 0.0)[0]
    t_violation = float(trajectory.t[violations[0]]) if len(violations) else None
    constant = math.exp(float(np.max(worst)) - log_c)
    return DominationReport(
        dominates=t_violation is None and not trajectory.blew_up,
        min_margin=float(np.min(margin)),
        t_violation=t_violation,
        constant=constant,
    )


class BlowupBracket(NamedTuple):
    nu: float
    eps_high: float
    eps_low: float
    high_blowups: int
    low_blowups: int
    samples: int

    @property
    def holds(self) -> bool:
        return self.high_blowups > 0 and self.low_blowups == 0


def blowup_bracket(
    nu: float,
    samples: Iterable[Tuple[int, float]],
    alpha: float = 10.0,
    high: float = 10.0,
    low: float = 0.1,
) -> BlowupBracket:
    """Count toy blow-ups over I_{k,eta} for eps = high * nu^(2/3) and eps = low * nu^(2/3)."""
    threshold = nu ** (2.0 / 3.0)
    pairs = list(samples)
    counts = []
    for eps in (high * threshold, low * threshold):
        params = ToyParams(eps, nu, 0.0, alpha)
        counts.append(
            sum(integrate_toy(ToyState.initial(k, eta), params).blew_up for k, eta in pairs)
        )
    return BlowupBracket(nu, high * threshold, low * threshold, counts[0], counts[1], len(pairs))


class LossFit(NamedTuple):
    c: float
    p: float
    intercept: float
    residual: float
    r_squared: float


def gevrey_loss_scan(eta_list: Sequence[float], kappa: float) -> LossFit:
    """Fit log(w(2 eta, eta)/w(sqrt eta, eta)) = 2c sqrt(eta) - p log(eta) + b."""
    etas = np.asarray(eta_list, dtype=float)
    if len(etas) < 3 or math.log10(etas.max() / etas.min()) < 3.0 - 1e-9:
        raise FitError(FitModel.LINEAR.value, "eta list must span at least 3 decades")

    y = log_w(2.0 * etas, etas, kappa) - log_w(np.sqrt(etas), etas, kappa)
    design = np.column_stack([np.sqrt(etas), -np.log(etas), np.ones_like(etas)])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    residual = float(np.sqrt(np.mean((fitted - y) ** 2)))
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum((fitted - y) ** 2)) / total if total > 0 else 1.0
    return LossFit(0.5 * float(coef[0]), float(coef[1]), float(coef[2]), residual, r_squared)
