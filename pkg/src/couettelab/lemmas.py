# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

"""Empirical constants for the frequency-ratio inequalities.

Each check evaluates log(LHS) - log(RHS) of one inequality over a sampled
frequency/time box and reports the largest ratio, i.e. the implied constant
hidden in the inequality.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Dict, NamedTuple, Optional, Tuple

import numpy as np
from typing_extensions import TypedDict

from .cl_types import Component, LemmaId
from .config import config
from .constants import STANDARD_BOX
from .exceptions import UnknownLemmaError
from .multiplier import (
    NormParams,
    critical_time,
    dlog_w_dt,
    interval_index,
    lambda_of_t,
    log_norm_A,
    log_w,
    log_w3,
    measure_mu,
)

ABASIC_C = 0.5
WELLSEP_K = 2.0


@dataclass(frozen=True)
class Box:
    k_max: int = STANDARD_BOX[0]
    eta_max: float = STANDARD_BOX[1]
    l_max: int = STANDARD_BOX[2]
    t_min: float = STANDARD_BOX[3]
    t_max: float = STANDARD_BOX[4]

    def doubled(self) -> "Box":
        return dataclasses.replace(
            self,
            k_max=2 * self.k_max,
            eta_max=2.0 * self.eta_max,
            l_max=2 * self.l_max,
            t_max=2.0 * self.t_max,
        )

    def __str__(self) -> str:
        return (
            f"|k|<={self.k_max} |eta|<={self.eta_max:g} |l|<={self.l_max} "
            f"t in [{self.t_min:g}, {self.t_max:g}]"
        )


class Samples(NamedTuple):
    k: np.ndarray
    kp: np.ndarray
    eta: np.ndarray
    xi: np.ndarray
    l: np.ndarray
    lp: np.ndarray
    t: np.ndarray


class LemmaReport(TypedDict):
    lemma_id: str
    box: str
    samples: int
    max_ratio: float
    log_max_ratio: float
    argmax: Dict[str, float]


class BoxDoubling(NamedTuple):
    base: LemmaReport
    doubled: LemmaReport
    growth: float


def draw_samples(box: Box, count: int, seed: int) -> Samples:
    """Random box samples plus a structured third on exact resonances t = eta/k with xi = eta."""
    rng = np.random.default_rng(seed)
    k = rng.integers(-box.k_max, box.k_max + 1, count)
    kp = rng.integers(-box.k_max, box.k_max + 1, count)
    eta = rng.uniform(-box.eta_max, box.eta_max, count)
    xi = rng.uniform(-box.eta_max, box.eta_max, count)
    l = rng.integers(-box.l_max, box.l_max + 1, count)
    lp = rng.integers(-box.l_max, box.l_max + 1, count)
    log_t = rng.uniform(math.log(box.t_min), math.log(box.t_max), count)
    t = np.exp(log_t)

    structured = slice(0, count // 3)
    near = slice(count // 3, count // 2)
    xi[structured] = eta[structured]
    xi[near] = eta[near] + rng.uniform(-2.0, 2.0, near.stop - near.start)
    xi = np.clip(xi, -box.eta_max, box.eta_max)
    safe_k = np.where(k == 0, 1, k)
    resonant = np.abs(eta / safe_k)
    t[structured] = np.clip(resonant[structured], box.t_min, box.t_max)
    return Samples(k, kp, eta, xi, l, lp, t)


def _nonzero(k: np.ndarray) -> np.ndarray:
    return np.where(k == 0, 1, k)


def _l1(*values: np.ndarray) -> np.ndarray:
    return sum(np.abs(v) for v in values)  # type: ignore[return-value]


def _log_jap(*values: np.ndarray) -> np.ndarray:
    return 0.5 * np.log1p(sum(v * v for v in values))


def in_resonant_interval(t: np.ndarray, k: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """t in the resonant interval of (k, eta): t in I_{k,eta} and 2 sqrt|eta| <= t_{k,eta}."""
    k_arr, eta_arr, t_arr = np.broadcast_arrays(np.asarray(k), np.asarray(eta), np.asarray(t))
    idx = interval_index(t_arr, eta_arr)
    same = (idx == np.abs(k_arr)) & (k_arr * eta_arr > 0)
    ae = np.abs(eta_arr).astype(float)
    safe_k = np.maximum(np.abs(k_arr), 1)
    t_left = ae / safe_k - ae / (2.0 * safe_k * (safe_k + 1.0))
    return same & (2.0 * np.sqrt(ae) <= t_left)


def _chi_nr(s: Samples) -> np.ndarray:
    resonant = (
        in_resonant_interval(s.t, s.k, s.eta)
        & in_resonant_interval(s.t, s.k, s.xi)
        & (np.abs(s.l) < np.abs(s.eta) / 5.0)
        & (np.abs(s.lp) < np.abs(s.xi) / 5.0)
    )
    return 1.0 - resonant


def _gamma_direct(i: int, j: int, a: str, b: str, log_t: np.ndarray, log_j: np.ndarray, d1: float):
    table = {
        (1, 2, "0", "0"): -log_t,
        (1, 2, "n", "n"): -log_t - d1 * log_j,
        (1, 2, "0", "n"): -log_t + log_j,
        (1, 2, "n", "0"): -log_t - (1.0 + d1) * log_j,
        (1, 3, "0", "0"): -log_t,
        (1, 3, "n", "n"): -log_t + (1.0 - d1) * log_j,
        (1, 3, "0", "n"): -log_t + 2.0 * log_j,
        (1, 3, "n", "0"): -log_t - (1.0 + d1) * log_j,
        (2, 3, "n", "n"): log_j,
        (2, 3, "0", "n"): 2.0 * log_j,
        (2, 3, "n", "0"): -log_j,
        (2, 3, "0", "0"): 0.0 * log_j,
        (1, 1, "0", "n"): (1.0 + d1) * log_j,
        (2, 2, "0", "n"): log_j,
        (3, 3, "0", "n"): 2.0 * log_j,
    }
    return table.get((i, j, a, b))


def log_gamma_weight(
    i: int, j: int, a: str, b: str, t: np.ndarray, xi: np.ndarray, lp: np.ndarray, delta_1: float
) -> np.ndarray:
    """log Gamma(i,j,a,b) with a, b in {"0", "n"} (zero / non-zero x-frequency)."""
    log_t = _log_jap(t)
    log_j = _log_jap(t / np.exp(_log_jap(xi, lp)))
    if i == j and a == b:
        return np.zeros_like(log_t)
    direct = _gamma_direct(i, j, a, b, log_t, log_j, delta_1)
    if direct is not None:
        return np.asarray(direct)
    reverse = _gamma_direct(j, i, b, a, log_t, log_j, delta_1)
    if reverse is None:
        raise UnknownLemmaError(f"Gamma({i},{j},{a},{b})")
    return -np.asarray(reverse)


_COMPONENTS = {1: Component.ONE, 2: Component.TWO, 3: Component.THREE}


def _abasic12(s: Samples, params: NormParams) -> np.ndarray:
    lam = lambda_of_t(s.t, params)
    exchange = ABASIC_C * lam * _l1(s.k - s.kp, s.eta - s.xi, s.l - s.lp) ** params.s
    a = np.where(s.k != 0, "n", "0")
    b = np.where(s.kp != 0, "n", "0")
    worst = np.full(s.t.shape, -np.inf)
    for i in (1, 2):
        lhs = log_norm_A(_COMPONENTS[i], s.k, s.eta, s.l, s.t, params)
        for j in (1, 2, 3):
            rhs = log_norm_A(_COMPONENTS[j], s.kp, s.xi, s.lp, s.t, params) + exchange
            gamma = np.zeros_like(s.t)
            for aa in ("0", "n"):
                for bb in ("0", "n"):
                    mask = (a == aa) & (b == bb)
                    gamma = np.where(
                        mask, log_gamma_weight(i, j, aa, bb, s.t, s.xi, s.lp, params.delta_1), gamma
                    )
            worst = np.maximum(worst, lhs - rhs - gamma)
    return worst


def _dtw_bracket(s: Samples, params: NormParams) -> np.ndarray:
    jt_s = np.exp(params.s * _log_jap(s.t))
    lhs = np.sqrt(dlog_w_dt(s.t, s.eta, params.kappa)) + _l1(s.k, s.eta, s.l) ** (
        params.s / 2.0
    ) / jt_s
    rhs = (
        np.sqrt(dlog_w_dt(s.t, s.xi, params.kappa))
        + np.exp(0.5 * params.s * _log_jap(s.kp, s.xi, s.lp)) / jt_s
    ) * np.exp(2.0 * _log_jap(s.k - s.kp, s.eta - s.xi, s.l - s.lp))
    return np.log(lhs) - np.log(rhs)


def _basic_nr(s: Samples, params: NormParams) -> np.ndarray:
    k = _nonzero(s.k)
    lhs = (1.0 / _l1(k, s.eta - k * s.t, s.l) + 1.0 / _l1(k, s.xi - k * s.t, s.lp)) * _chi_nr(
        s._replace(k=k)
    )
    log_rhs = -_log_jap(k, s.t, s.lp) + _log_jap(s.eta - s.xi, s.l - s.lp)
    with np.errstate(divide="ignore"):
        return np.log(lhs) - log_rhs


def _tri_triv(s: Samples, params: NormParams) -> np.ndarray:
    k = _nonzero(s.k)
    lhs = np.abs(s.eta - k * s.t)
    rhs = np.exp(_log_jap(s.eta - s.xi)) * (np.abs(k) + np.abs(s.xi - k * s.t))
    with np.errstate(divide="ignore"):
        return np.log(lhs) - np.log(rhs)


def _rat_long_time(s: Samples, params: NormParams) -> np.ndarray:
    k = _nonzero(s.k)
    log_lhs = -np.log(_l1(k, s.eta - k * s.t, s.l)) + _log_jap(s.t / np.exp(_log_jap(s.xi, s.lp)))
    return log_lhs - _log_jap(s.eta - s.xi, s.l - s.lp)


def _dtw(s: Samples, params: NormParams) -> np.ndarray:
    # r: resonant index of (t, eta); only samples inside a resonant interval count
    r = interval_index(s.t, s.eta) * np.sign(s.eta).astype(int)
    inside = in_resonant_interval(s.t, r, s.eta)
    h = 1e-6 * np.maximum(s.t, 1.0)
    fd = (log_w(s.t + h, s.eta, params.kappa) - log_w(s.t - h, s.eta, params.kappa)) / (2.0 * h)
    safe_r = np.where(r == 0, 1, r)
    model = params.kappa / (1.0 + np.abs(s.eta / safe_r - s.t)) + params.kappa * np.abs(
        safe_r
    ) / s.t
    log_ratio = np.log(np.maximum(fd, 1e-300)) - np.log(model)
    return np.where(inside, np.abs(log_ratio), -np.inf)


def _w_rat(s: Samples, params: NormParams) -> np.ndarray:
    return (
        log_w(s.t, s.eta, params.kappa)
        - log_w(s.t, s.xi, params.kappa)
        - params.mu_ * np.sqrt(np.abs(s.eta - s.xi))
    )


def _jswap(s: Samples, params: NormParams) -> np.ndarray:
    k = _nonzero(s.k)
    log_lhs = log_w3(s.t, s.kp, s.eta, params.kappa) - log_w3(s.t, k, s.xi, params.kappa)
    exchange = params.mu_ * np.sqrt(_l1(k - s.kp, s.eta - s.xi))

    res_k_eta = in_resonant_interval(s.t, k, s.eta)
    res_k_xi = in_resonant_interval(s.t, k, s.xi)
    res_kp_xi = in_resonant_interval(s.t, s.kp, s.xi)
    basic = (~res_k_eta) | (k == s.kp) | (res_k_eta & ~res_k_xi)
    gain = res_kp_xi & (k != s.kp)

    general = np.log(s.t) - np.log(np.abs(k) + np.abs(s.eta - k * s.t))
    nr_gain = np.log(np.abs(s.kp) + np.abs(s.xi - s.kp * s.t)) - np.log(s.t)
    bound = np.where(basic, 0.0, general)
    bound = np.where(gain, np.minimum(bound, nr_gain), bound)
    return log_lhs - bound - exchange


def _wellsep(s: Samples, params: NormParams) -> np.ndarray:
    k = interval_index(s.t, s.eta)
    n = interval_index(s.t, s.xi)
    ae = np.abs(s.eta)
    ax = np.abs(s.xi)
    valid = (
        (k > 0)
        & (n > 0)
        & (s.eta * s.xi > 0)
        & (ax / WELLSEP_K <= ae)
        & (ae <= WELLSEP_K * ax)
    )
    safe_k = np.maximum(k, 1)
    safe_n = np.maximum(n, 1)
    same = k == n
    far = (np.abs(s.t - ae / safe_k) >= ae / (10.0 * WELLSEP_K * safe_k**2)) & (
        np.abs(s.t - ax / safe_n) >= ax / (10.0 * WELLSEP_K * safe_n**2)
    )
    separated = np.log(ae / safe_n) - np.log(np.maximum(np.abs(s.eta - s.xi), 1e-300))
    return np.where(valid & ~same & ~far, separated, -np.inf)


def _total_growth_w(s: Samples, params: NormParams) -> np.ndarray:
    fit = measure_mu(params.kappa)
    etas = np.logspace(2.0, 6.0, s.t.size)
    corrected = -log_w(1.0, etas, params.kappa) + fit.p * np.log(etas) - fit.intercept
    ratio = corrected / (0.5 * fit.mu * np.sqrt(etas))
    return np.abs(np.log(ratio))


LemmaCheck = Callable[[Samples, NormParams], np.ndarray]

LEMMAS: Dict[str, LemmaCheck] = {
    "ABasic12": _abasic12,
    "dtwBasicBrack": _dtw_bracket,
    "basicNR": _basic_nr,
    "TriTriv": _tri_triv,
    "ratlongtime": _rat_long_time,
    "dtw": _dtw,
    "wRat": _w_rat,
    "Jswap": _jswap,
    "totalGrowthw": _total_growth_w,
    "wellsep": _wellsep,
}


def verify_lemma(
    lemma_id: str,
    box: Optional[Box] = None,
    samples: Optional[int] = None,
    params: Optional[NormParams] = None,
    seed: Optional[int] = None,
) -> LemmaReport:
    if lemma_id not in LEMMAS:
        raise UnknownLemmaError(lemma_id)

    box = box or Box()
    count = samples or config.lemma_samples
    params = params or NormParams.from_config(nu=1e-3)
    s = draw_samples(box, count, config.lemma_seed if seed is None else seed)
    if lemma_id == "totalGrowthw":
        s = s._replace(eta=np.logspace(2.0, 6.0, count))

    log_ratio = LEMMAS[lemma_id](s, params)
    finite = np.where(np.isnan(log_ratio), -np.inf, log_ratio)
    idx = int(np.argmax(finite))
    log_max = float(finite[idx])
    argmax = {
        "k": float(s.k[idx]),
        "k_prime": float(s.kp[idx]),
        "eta": float(s.eta[idx]),
        "xi": float(s.xi[idx]),
        "l": float(s.l[idx]),
        "l_prime": float(s.lp[idx]),
        "t": float(s.t[idx]),
    }
    return LemmaReport(
        lemma_id=LemmaId(lemma_id),
        box=str(box),
        samples=count,
        max_ratio=math.exp(min(log_max, 700.0)) if log_max > -np.inf else 0.0,
        log_max_ratio=log_max,
        argmax=argmax,
    )


def box_doubling(
    lemma_id: str,
    box: Optional[Box] = None,
    samples: Optional[int] = None,
    params: Optional[NormParams] = None,
) -> BoxDoubling:
    box = box or Box()
    base = verify_lemma(lemma_id, box, samples, params)
    doubled = verify_lemma(lemma_id, box.doubled(), samples, params)
    growth = math.exp(doubled["log_max_ratio"] - base["log_max_ratio"])
    return BoxDoubling(base, doubled, growth)


def resonant_times(eta: float) -> Tuple[float, ...]:
    """Critical times t_{k,eta} for every k with a critical interval."""
    n = int(math.floor(math.sqrt(abs(eta)))) if abs(eta) > 1 else 0
    sgn = 1 if eta > 0 else -1
    return tuple(critical_time(sgn * k, eta) for k in range(1, n + 1))
