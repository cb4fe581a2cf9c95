# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

"""Critical times, the resonance multipliers w-bar, w, w3 and w_L, the dissipation
multiplier D, and the assembled high norms.

All multipliers are evaluated in log-space: w can reach exp(-c sqrt(eta)).
Frequencies enter only through |eta|; a critical interval I_{k,eta} exists for
x-frequencies with k*eta > 0 and 1 <= |k| <= E(sqrt|eta|).
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln, hyp2f1

from .cl_types import Component, NormKind
from .config import config
from .exceptions import (
    MultiplierDomainError,
    NormParamsError,
    NormRangeError,
    ProfileRangeError,
)
from .utils import debug_print

ArrayLike = Union[float, int, np.ndarray]

LOG_FLOAT_MAX = math.log(np.finfo(float).max)
T_FLOOR = 1e-300


def _n_max(abs_eta: np.ndarray) -> np.ndarray:
    return np.where(abs_eta > 1.0, np.floor(np.sqrt(np.maximum(abs_eta, 0.0))), 0.0)


def critical_time(k: int, eta: float) -> float:
    """t_{k,eta} = |eta/k| - |eta|/(2|k|(|k|+1)), with t_{0,eta} = 2|eta|."""
    if k == 0:
        return 2.0 * abs(eta)
    if k * eta <= 0 or abs(k) > int(_n_max(np.asarray(abs(eta)))):
        raise MultiplierDomainError(k, eta)
    ak = abs(k)
    ae = abs(eta)
    return ae / ak - ae / (2.0 * ak * (ak + 1))


def resonance_coeffs(k: int, eta: float) -> Tuple[float, float]:
    if k < 1 or k * eta <= 0 or k > int(_n_max(np.asarray(abs(eta)))):
        raise MultiplierDomainError(k, eta)
    ae = abs(eta)
    a = 2.0 * (k + 1) / k * (1.0 - k * k / ae)
    if k == 1:
        return 1.0 - 1.0 / ae, a
    return 2.0 * (k - 1) / k * (1.0 - k * k / ae), a


class _Interval(NamedTuple):
    abs_eta: np.ndarray
    k: np.ndarray
    safe_eta: np.ndarray
    safe_k: np.ndarray
    s: np.ndarray
    b: np.ndarray
    a: np.ndarray


def _locate(t: ArrayLike, eta: ArrayLike) -> _Interval:
    t_arr, eta_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(eta, dtype=float))
    ae = np.abs(eta_arr)
    n = _n_max(ae)
    big = ae > 1.0
    safe_eta = np.where(big, ae, 2.0)
    safe_n = np.maximum(n, 1.0)

    r = np.maximum(t_arr, T_FLOOR) / safe_eta
    root = (-(2.0 * r - 2.0) + np.sqrt((2.0 * r - 2.0) ** 2 + 8.0 * r)) / (4.0 * r)
    k = np.clip(np.ceil(root), 1.0, safe_n)

    t_n = safe_eta / safe_n - safe_eta / (2.0 * safe_n * (safe_n + 1.0))
    inside = big & (t_arr >= t_n) & (t_arr < 2.0 * ae)
    k = np.where(inside, k, 0.0)

    safe_k = np.maximum(k, 1.0)
    s = t_arr - safe_eta / safe_k
    common = 1.0 - safe_k**2 / safe_eta
    b = np.where(safe_k == 1.0, 1.0 - 1.0 / safe_eta, 2.0 * (safe_k - 1.0) / safe_k * common)
    a = 2.0 * (safe_k + 1.0) / safe_k * common
    return _Interval(ae, k.astype(int), safe_eta, safe_k, s, b, a)


def interval_index(t: ArrayLike, eta: ArrayLike) -> np.ndarray:
    """The k >= 1 with t in I_{k,|eta|}, or 0 outside every critical interval."""
    return _locate(t, eta).k


def log_wbar(t: ArrayLike, eta: ArrayLike, kappa: float) -> np.ndarray:
    iv = _locate(t, eta)
    t_arr = np.broadcast_to(np.asarray(t, dtype=float), iv.k.shape)
    log_eta = np.log(iv.safe_eta)
    n = _n_max(iv.abs_eta)

    # log wbar(t_{k-1,eta}) accumulated backward from wbar = 1 at t = 2 eta
    log_right = (1.0 + 2.0 * kappa) * (2.0 * gammaln(iv.safe_k) - (iv.safe_k - 1.0) * log_eta)
    log_ratio = np.log(iv.safe_k**2 / iv.safe_eta)
    right = log_right + kappa * (log_ratio + np.log1p(iv.b * np.maximum(iv.s, 0.0)))
    left = log_right + kappa * log_ratio - (1.0 + kappa) * np.log1p(iv.a * np.maximum(-iv.s, 0.0))
    inside = np.where(iv.s >= 0.0, right, left)

    floor = (1.0 + 2.0 * kappa) * (2.0 * gammaln(n + 1.0) - n * log_eta)
    before = (iv.abs_eta > 1.0) & (t_arr < 2.0 * iv.abs_eta)
    return np.where(iv.k > 0, inside, np.where(before, floor, 0.0))


def log_extra_loss(t: ArrayLike, eta: ArrayLike, kappa: float) -> np.ndarray:
    t_arr, eta_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(eta, dtype=float))
    ae = np.abs(eta_arr)
    root = np.sqrt(ae)
    safe_t = np.maximum(t_arr, T_FLOOR)
    first = np.maximum(2.0 * root - t_arr, 0.0)
    second = np.where(
        t_arr >= 2.0 * ae, 0.0, np.where(t_arr >= root, ae / safe_t - 0.5, root - 0.5)
    )
    return np.where(ae > 1.0, -kappa * (first + second), 0.0)


def log_w(t: ArrayLike, eta: ArrayLike, kappa: float) -> np.ndarray:
    return log_wbar(t, eta, kappa) + log_extra_loss(t, eta, kappa)


def log_w3(t: ArrayLike, k_prime: ArrayLike, eta: ArrayLike, kappa: float) -> np.ndarray:
    iv = _locate(t, eta)
    k_res = np.sign(np.broadcast_to(np.asarray(eta, dtype=float), iv.k.shape)) * iv.k
    non_resonant = (iv.k > 0) & (np.asarray(k_prime) != k_res)
    c = np.where(iv.s >= 0.0, iv.b, iv.a)
    gain = np.log(iv.safe_eta / (iv.safe_k**2 * (1.0 + c * np.abs(iv.s))))
    return log_w(t, eta, kappa) + np.where(non_resonant, gain, 0.0)


def dlog_w_dt(t: ArrayLike, eta: ArrayLike, kappa: float) -> np.ndarray:
    iv = _locate(t, eta)
    t_arr = np.broadcast_to(np.asarray(t, dtype=float), iv.k.shape)
    ae = iv.abs_eta
    root = np.sqrt(ae)
    right = kappa * iv.b / (1.0 + iv.b * np.maximum(iv.s, 0.0))
    left = (1.0 + kappa) * iv.a / (1.0 + iv.a * np.maximum(-iv.s, 0.0))
    resonant = np.where(iv.k > 0, np.where(iv.s >= 0.0, right, left), 0.0)
    extra = kappa * (t_arr < 2.0 * root) + kappa * ae / np.maximum(t_arr, T_FLOOR) ** 2 * (
        (t_arr >= root) & (t_arr <= 2.0 * ae)
    )
    return np.where(ae > 1.0, resonant + extra, 0.0)


class CriticalEntry(NamedTuple):
    k: int
    t_left: float
    t_right: float
    resonant: bool


@dataclass(frozen=True)
class CriticalIndex:
    eta: float
    entries: Tuple[CriticalEntry, ...]

    def breakpoints(self) -> List[float]:
        points = []
        for entry in self.entries:
            points.extend([entry.t_left, abs(self.eta) / entry.k, entry.t_right])
        return points


def critical_index(eta: float, k_sign: int = 0) -> CriticalIndex:
    """Critical intervals of eta; k_sign restricts to x-frequencies of that sign."""
    if abs(eta) <= 1.0 or k_sign * eta < 0:
        return CriticalIndex(eta, ())

    sgn = 1 if eta > 0 else -1
    entries = []
    for k in range(1, int(_n_max(np.asarray(abs(eta)))) + 1):
        t_left = critical_time(sgn * k, eta)
        t_right = critical_time(sgn * (k - 1), eta) if k > 1 else 2.0 * abs(eta)
        entries.append(CriticalEntry(k, t_left, t_right, 2.0 * math.sqrt(abs(eta)) <= t_left))
    return CriticalIndex(eta, tuple(entries))


@dataclass(frozen=True)
class MultiplierProfile:
    eta: float
    kappa: float
    t_grid: np.ndarray
    log_wbar: np.ndarray
    log_w: np.ndarray
    log_w3: Dict[int, np.ndarray]
    critical: CriticalIndex

    @property
    def wbar(self) -> np.ndarray:
        return np.exp(self.log_wbar)

    @property
    def w(self) -> np.ndarray:
        return np.exp(self.log_w)

    def w3(self, k_prime: int) -> np.ndarray:
        return np.exp(self.log_w3[k_prime])

    def log_w_at(self, t: ArrayLike) -> np.ndarray:
        return log_w(t, self.eta, self.kappa)

    def log_w3_at(self, t: ArrayLike, k_prime: ArrayLike) -> np.ndarray:
        return log_w3(t, k_prime, self.eta, self.kappa)

    def dlog_w_dt_at(self, t: ArrayLike) -> np.ndarray:
        return dlog_w_dt(t, self.eta, self.kappa)


def build_profile(
    eta: float,
    kappa: float,
    t_grid: Optional[Sequence[float]] = None,
    k_primes: Optional[Sequence[int]] = None,
    points: int = 2001,
) -> MultiplierProfile:
    critical = critical_index(eta)
    t_max = max(2.0 * abs(eta), 2.0)
    if t_grid is None:
        t_grid = np.linspace(0.0, t_max, points)
    nodes = np.union1d(np.asarray(t_grid, dtype=float), np.asarray(critical.breakpoints()))

    if k_primes is None:
        sgn = 1 if eta >= 0 else -1
        k_primes = [sgn * k for k in range(0, len(critical.entries) + 2)]

    debug_print(
        f"profile: eta={eta} kappa={kappa} nodes={len(nodes)} "
        f"intervals={len(critical.entries)}"
    )
    return MultiplierProfile(
        eta=eta,
        kappa=kappa,
        t_grid=nodes,
        log_wbar=log_wbar(nodes, eta, kappa),
        log_w=log_w(nodes, eta, kappa),
        log_w3={kp: log_w3(nodes, kp, eta, kappa) for kp in k_primes},
        critical=critical,
    )


@dataclass
class ProfileBank:
    """Lazily built profiles for every |eta| up to eta_max."""

    kappa: float
    eta_max: float
    profiles: Dict[float, MultiplierProfile] = field(default_factory=dict)

    def get(self, eta: float) -> MultiplierProfile:
        if abs(eta) > self.eta_max * (1.0 + 1e-12):
            raise ProfileRangeError(eta, self.eta_max)
        key = round(abs(eta), 12)
        if key not in self.profiles:
            self.profiles[key] = build_profile(key, self.kappa)
        return self.profiles[key]

    def covers(self, eta_values: np.ndarray) -> None:
        peak = float(np.max(np.abs(eta_values))) if np.size(eta_values) else 0.0
        if peak > self.eta_max * (1.0 + 1e-12):
            raise ProfileRangeError(peak, self.eta_max)


def log_w_L(t: ArrayLike, k: ArrayLike, eta: ArrayLike, l: ArrayLike, kappa: float) -> np.ndarray:
    t_arr, k_arr, eta_arr, l_arr = np.broadcast_arrays(
        np.asarray(t, dtype=float),
        np.asarray(k, dtype=float),
        np.asarray(eta, dtype=float),
        np.asarray(l, dtype=float),
    )
    a = np.sqrt(k_arr**2 + l_arr**2)
    safe_a = np.where(a > 0, a, 1.0)
    value = (
        np.sign(k_arr)
        * kappa
        * np.sqrt(1.0 + l_arr**2)
        / safe_a
        * (np.arctan((k_arr * t_arr - eta_arr) / safe_a) - np.arctan((k_arr - eta_arr) / safe_a))
    )
    return np.where(k_arr == 0, 0.0, value)


def w_L(t: ArrayLike, k: ArrayLike, eta: ArrayLike, l: ArrayLike, kappa: float) -> np.ndarray:
    return np.exp(log_w_L(t, k, eta, l, kappa))


def dissipation_D(t: ArrayLike, eta: ArrayLike, nu: float, alpha: float) -> np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    ae = np.abs(np.asarray(eta, dtype=float))
    return nu * ae**3 / (3.0 * alpha) + nu * np.maximum(t_arr**3 - 8.0 * ae**3, 0.0) / (
        24.0 * alpha
    )


class MuFit(NamedTuple):
    mu: float
    p: float
    intercept: float
    residual: float


@lru_cache(maxsize=32)
def measure_mu(kappa: float, eta_lo: float = 1e2, eta_hi: float = 1e6, count: int = 41) -> MuFit:
    """Fit log(1/w(1,eta)) = (mu/2) sqrt(eta) - p log(eta) + c over a log-spaced eta range."""
    etas = np.logspace(math.log10(eta_lo), math.log10(eta_hi), count)
    y = -log_w(1.0, etas, kappa)
    design = np.column_stack([np.sqrt(etas), -np.log(etas), np.ones_like(etas)])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    return MuFit(2.0 * float(coef[0]), float(coef[1]), float(coef[2]), residual)


@dataclass(frozen=True)
class NormParams:
    lam0: float = 1.0
    lam_prime: float = 0.5
    delta_lambda: float = 0.01
    s: float = 0.6
    alpha: int = 10
    delta_1: float = 0.01
    kappa: float = 8.0
    nu: float = 1e-3
    beta: Optional[float] = None
    gamma: Optional[float] = None
    sigma: Optional[float] = None
    mu: Optional[float] = None

    def __post_init__(self) -> None:
        if self.beta is None:
            object.__setattr__(self, "beta", 3.0 * self.alpha + 8.0)
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.beta_ + 3.0 * self.alpha + 13.0)
        if self.sigma is None:
            object.__setattr__(self, "sigma", self.gamma_ + 7.0)
        if self.mu is None:
            object.__setattr__(self, "mu", measure_mu(self.kappa).mu)
        self._validate()

    @property
    def beta_(self) -> float:
        assert self.beta is not None
        return self.beta

    @property
    def gamma_(self) -> float:
        assert self.gamma is not None
        return self.gamma

    @property
    def sigma_(self) -> float:
        assert self.sigma is not None
        return self.sigma

    @property
    def mu_(self) -> float:
        assert self.mu is not None
        return self.mu

    @classmethod
    def from_config(cls, nu: float, **overrides: float) -> "NormParams":
        values = {
            "lam0": config.lambda_0,
            "lam_prime": config.lambda_prime,
            "delta_lambda": config.delta_lambda,
            "s": config.s,
            "alpha": config.alpha,
            "delta_1": config.delta_1,
            "kappa": config.kappa,
            "nu": nu,
        }
        values.update(overrides)
        return cls(**values)  # type: ignore[arg-type]

    def _validate(self) -> None:
        if not self.lam0 > self.lam_prime > 0:
            raise NormParamsError("lam_prime", self.lam_prime, "need lam0 > lam_prime > 0")
        if not 0.5 < self.s < 1.0:
            raise NormParamsError("s", self.s, "must lie in (1/2, 1)")
        if self.alpha < 10 or int(self.alpha) != self.alpha:
            raise NormParamsError("alpha", self.alpha, "must be an integer >= 10")
        if not self.delta_1 > 0:
            raise NormParamsError("delta_1", self.delta_1, "must be positive")
        if not self.kappa > 1:
            raise NormParamsError("kappa", self.kappa, "must exceed 1")
        if not self.nu > 0:
            raise NormParamsError("nu", self.nu, "must be positive")
        if not self.mu_ > 0:
            raise NormParamsError("mu", self.mu, "must be positive")
        if not self.beta_ > 3 * self.alpha + 7:
            raise NormParamsError("beta", self.beta, "need beta > 3 alpha + 7")
        if not self.gamma_ > self.beta_ + 3 * self.alpha + 12:
            raise NormParamsError("gamma", self.gamma, "need gamma > beta + 3 alpha + 12")
        if not self.sigma_ > self.gamma_ + 6:
            raise NormParamsError("sigma", self.sigma, "need sigma > gamma + 6")

    @property
    def lambda_1(self) -> float:
        return 0.75 * self.lam0 + 0.25 * self.lam_prime


def _antiderivative(t: ArrayLike, m: float) -> np.ndarray:
    # int_0^t <tau>^{-m} d tau
    t_arr = np.asarray(t, dtype=float)
    return t_arr * hyp2f1(0.5, 0.5 * m, 1.5, -(t_arr**2))


def lambda_of_t(t: ArrayLike, params: NormParams) -> np.ndarray:
    m = min(2.0 * params.s, 1.5)
    return params.lambda_1 - params.delta_lambda * (_antiderivative(t, m) - _antiderivative(1.0, m))


class LogWeights(NamedTuple):
    """Log corrector multipliers at a frequency/time point."""

    log_w: ArrayLike
    log_w3: ArrayLike
    log_wl: ArrayLike
    lam: ArrayLike
    mu: float


def log_weights(
    k: ArrayLike,
    eta: ArrayLike,
    l: ArrayLike,
    t: ArrayLike,
    params: NormParams,
    profile: Optional[MultiplierProfile] = None,
) -> LogWeights:
    if profile is not None:
        if np.any(np.abs(np.abs(np.asarray(eta, dtype=float)) - abs(profile.eta)) > 1e-12):
            raise ProfileRangeError(float(np.max(np.abs(eta))), abs(profile.eta))
    return LogWeights(
        log_w=log_w(t, eta, params.kappa),
        log_w3=log_w3(t, k, eta, params.kappa),
        log_wl=log_w_L(t, k, eta, l, params.kappa),
        lam=lambda_of_t(t, params),
        mu=params.mu_,
    )


def assemble_log_A(
    component: Component,
    kind: NormKind,
    k: ArrayLike,
    eta: ArrayLike,
    l: ArrayLike,
    t: ArrayLike,
    params: NormParams,
    weights: LogWeights,
) -> np.ndarray:
    k_arr, eta_arr, l_arr, t_arr = np.broadcast_arrays(
        np.asarray(k, dtype=float),
        np.asarray(eta, dtype=float),
        np.asarray(l, dtype=float),
        np.asarray(t, dtype=float),
    )
    if component is Component.C:
        k_arr = np.zeros_like(k_arr)

    size = np.abs(k_arr) + np.abs(eta_arr) + np.abs(l_arr)
    log_br = 0.5 * np.log1p(k_arr**2 + eta_arr**2 + l_arr**2)
    log_br_el = 0.5 * np.log1p(eta_arr**2 + l_arr**2)
    log_jt = 0.5 * np.log1p(t_arr**2)
    log_t = np.log(np.maximum(t_arr, T_FLOOR))
    nonzero = k_arr != 0
    gevrey = weights.lam * size**params.s

    if kind is NormKind.NU:
        d_value = dissipation_D(t_arr, eta_arr, params.nu, params.alpha)
        base = (
            gevrey
            + params.beta_ * log_br
            + params.alpha * 0.5 * np.log1p(d_value**2)
            - weights.log_wl
        )
        base = np.where(nonzero, base, -np.inf)
        factor = {
            Component.Q: 0.0,
            Component.ONE: -log_jt + np.minimum(0.0, (1.0 + params.delta_1) * (log_br_el - log_t)),
            Component.TWO: np.minimum(0.0, log_br_el - log_t),
            Component.THREE: np.minimum(0.0, 2.0 * (log_br_el - log_t)),
            Component.C: 0.0,
        }[component]
        return np.asarray(base + factor)

    resonant_eta = params.mu_ * np.sqrt(np.abs(eta_arr))
    resonant_l = params.mu_ * np.sqrt(np.abs(l_arr))
    log_w_i = weights.log_w3 if component is Component.THREE else weights.log_w
    head = gevrey + params.sigma_ * log_br - weights.log_wl
    if kind is NormKind.A:
        base = head + np.logaddexp(resonant_eta - log_w_i, resonant_l)
    else:
        base = head + resonant_eta - weights.log_w
        if component is Component.THREE:
            base = base + weights.log_w - weights.log_w3

    factor = {
        Component.Q: 0.0,
        Component.ONE: -log_jt
        + np.where(nonzero, np.minimum(0.0, (1.0 + params.delta_1) * (log_br_el - log_jt)), 0.0),
        Component.TWO: np.where(nonzero, np.minimum(0.0, log_br_el - log_t), 0.0),
        Component.THREE: np.where(nonzero, np.minimum(0.0, 2.0 * (log_br_el - log_t)), 0.0),
        Component.C: 2.0 * log_br_el,
    }[component]
    return np.asarray(base + factor)


def log_norm_A(
    component: Component,
    k: ArrayLike,
    eta: ArrayLike,
    l: ArrayLike,
    t: ArrayLike,
    params: NormParams,
    profile: Optional[MultiplierProfile] = None,
    kind: NormKind = NormKind.A,
) -> np.ndarray:
    if component is Component.C:
        # C lives on the x-average, every weight sees k = 0
        k = np.zeros_like(np.asarray(k, dtype=float))
    weights = log_weights(k, eta, l, t, params, profile)
    return assemble_log_A(component, kind, k, eta, l, t, params, weights)


def _exp_checked(name: str, log_value: np.ndarray) -> np.ndarray:
    peak = float(np.max(log_value)) if np.size(log_value) else 0.0
    if peak > LOG_FLOAT_MAX:
        raise NormRangeError(name, peak)
    return np.exp(log_value)


def norm_A(
    component: Component,
    k: ArrayLike,
    eta: ArrayLike,
    l: ArrayLike,
    t: ArrayLike,
    params: NormParams,
    profile: Optional[MultiplierProfile] = None,
) -> np.ndarray:
    log_value = log_norm_A(component, k, eta, l, t, params, profile, NormKind.A)
    return _exp_checked(f"A^{component.value}", log_value)


def norm_A_tilde(
    component: Component,
    k: ArrayLike,
    eta: ArrayLike,
    l: ArrayLike,
    t: ArrayLike,
    params: NormParams,
    profile: Optional[MultiplierProfile] = None,
) -> np.ndarray:
    log_value = log_norm_A(component, k, eta, l, t, params, profile, NormKind.TILDE)
    return _exp_checked(f"A~^{component.value}", log_value)


def norm_A_nu(
    component: Component,
    k: ArrayLike,
    eta: ArrayLike,
    l: ArrayLike,
    t: ArrayLike,
    params: NormParams,
    profile: Optional[MultiplierProfile] = None,
) -> np.ndarray:
    log_value = log_norm_A(component, k, eta, l, t, params, profile, NormKind.NU)
    return _exp_checked(f"A^nu;{component.value}", log_value)
