# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

"""Pseudo-spectral solver for perturbations of plane Couette flow in the shear frame.

The velocity is stored in the coordinates X = x - tau y with tau = t - t_remap.
Viscosity is integrated exactly through the time-dependent symbol; the lift-up
source, the advection and both pressures are handled explicitly with one Leray
projection per stage.
"""

import bisect
import dataclasses
import math
import os
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import yaml
from colorama import Fore
from scipy.special import logsumexp
from tqdm import tqdm

from .cl_types import Component, Frame, NormKind
from .config import config
from .constants import WARNING
from .exceptions import BlowUpError, CflError, GridSpecError
from .grid import (
    GridSpec,
    PlaneSpec,
    SpectralField,
    VectorField,
    divergence,
    from_physical,
    hermitian_part,
    l2_norm,
    lab_wavenumbers,
    moving_frequencies,
    project_divergence_free,
    remap,
    to_physical,
)
from .multiplier import NormParams, ProfileBank, log_norm_A
from .snapshot import read_snapshot, write_snapshot
from .stepping import if_rk4
from .utils import cl_tqdm_write, debug_print, disable_tqdm, read_csv, write_csv

REMAP_PERIODS = 2


@dataclass(frozen=True)
class DnsState:
    u: VectorField
    t: float = 0.0
    nu: float = 0.0
    discarded_energy: float = 0.0
    cfl_retries: int = 0

    @property
    def grid(self) -> GridSpec:
        return self.u.grid  # type: ignore[return-value]

    @property
    def shear_age(self) -> float:
        return self.t - self.u.t_remap

    @classmethod
    def zeros(cls, grid: GridSpec, nu: float = 0.0) -> "DnsState":
        return cls(VectorField(grid.zeros(3), grid, Frame.SHEAR, 0.0), 0.0, nu)

    @classmethod
    def random(
        cls,
        grid: GridSpec,
        eps: float,
        seed: int,
        lam: float = 1.0,
        s: float = 0.6,
        nu: float = 0.0,
    ) -> "DnsState":
        """Seeded solenoidal field with spectral envelope exp(-lam |k,eta,l|^s), rms eps."""
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((3,) + grid.shape) + 1j * rng.standard_normal(
            (3,) + grid.shape
        )
        size = sum(np.abs(w) for w in grid.mesh())
        coeffs = noise * np.exp(-lam * size**s)
        coeffs = hermitian_part(coeffs, grid.ndim)
        coeffs = np.where(grid.dealias_mask, coeffs, 0.0)
        coeffs[(slice(None), 0, 0, 0)] = 0.0

        u = project_divergence_free(VectorField(coeffs, grid, Frame.SHEAR, 0.0), 0.0)
        rms = l2_norm(u) / math.sqrt(grid.volume)
        if rms > 0.0:
            u = u.replace(u.coeffs * (eps / rms))
        return cls(u, 0.0, nu)

    @classmethod
    def single_mode(
        cls,
        grid: GridSpec,
        index: Tuple[int, int, int],
        amplitude: float,
        nu: float = 0.0,
        velocity: Sequence[float] = (1.0, 1.0, 1.0),
    ) -> "DnsState":
        """Real field amplitude * P(v) cos(k x + eta y + l z) for one lattice index triple."""
        coeffs = grid.zeros(3)
        n = tuple(i % size for i, size in zip(index, grid.shape))
        mirror = tuple(-i % size for i, size in zip(index, grid.shape))
        v = np.asarray(velocity, dtype=float)
        coeffs[(slice(None),) + n] += 0.5 * amplitude * v
        coeffs[(slice(None),) + mirror] += 0.5 * amplitude * v
        u = project_divergence_free(VectorField(coeffs, grid, Frame.SHEAR, 0.0), 0.0)
        return cls(u, 0.0, nu)


def _dissipation_integral(grid: GridSpec, tau: float) -> np.ndarray:
    k, eta, l = grid.mesh()
    return (k * k + eta * eta + l * l) * tau - eta * k * tau * tau + k * k * tau**3 / 3.0


def _mask(grid: GridSpec, coeffs: np.ndarray) -> np.ndarray:
    return np.where(grid.dealias_mask, coeffs, 0.0)


def _rhs(u: VectorField, t: float) -> np.ndarray:
    grid = u.grid
    tau = t - u.t_remap
    symbols = [np.broadcast_to(s, grid.shape) for s in lab_wavenumbers(grid, tau)]

    velocity = [to_physical(u.component(i)) for i in range(3)]
    source = grid.zeros(3)
    for i in range(3):
        advection = np.zeros(grid.shape)
        for j in range(3):
            advection += velocity[j] * to_physical(
                u.component(i).replace(1j * symbols[j] * u.coeffs[i])
            )
        source[i] = from_physical(grid, -advection).coeffs
    source = _mask(grid, source)
    source[0] -= u.coeffs[1]

    k_sq = sum(s * s for s in symbols)
    zero = k_sq == 0
    inv_k_sq = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, k_sq))
    k_dot_s = sum(s * source[i] for i, s in enumerate(symbols))
    # d/dt of the shear-frame divergence constraint contributes k u2
    correction = (symbols[0] * u.coeffs[1] - k_dot_s) * inv_k_sq
    return np.stack([source[i] + s * correction for i, s in enumerate(symbols)])


def dns_rhs(state: DnsState) -> VectorField:
    """Time derivative without the viscous term."""
    return state.u.replace(_rhs(state.u, state.t))


def _cfl_bound(state: DnsState) -> float:
    umax = max(float(np.max(np.abs(to_physical(state.u.component(i))))) for i in range(3))
    if umax == 0.0:
        return math.inf
    spacing = min(length / n for length, n in zip(state.grid.lengths, state.grid.shape))
    return config.cfl * spacing / umax


def dns_step(state: DnsState, dt: float, remap_periods: int = REMAP_PERIODS) -> DnsState:
    grid = state.grid
    bound = _cfl_bound(state)
    retries = 0
    while dt > bound:
        retries += 1
        if retries > config.max_step_retries:
            raise CflError(state.t, dt, retries - 1)
        dt *= 0.5
    if retries:
        cl_tqdm_write(
            f"{WARNING} CFL: step halved {retries} time(s) to dt={dt:.3g} at t={state.t:.6g}"
            f"{Fore.RESET}"
        )

    next_remap = state.u.t_remap + remap_periods * grid.remap_period
    landing = state.t + dt >= next_remap - 1e-12
    if landing:
        dt = next_remap - state.t

    t_remap = state.u.t_remap

    def decay(t0: float, t1: float) -> np.ndarray:
        lost = _dissipation_integral(grid, t1 - t_remap) - _dissipation_integral(grid, t0 - t_remap)
        return np.exp(-state.nu * lost)

    def nonlinear(y: np.ndarray, t: float) -> np.ndarray:
        return _rhs(state.u.replace(y), t)

    t_new = next_remap if landing else state.t + dt
    coeffs = if_rk4(state.u.coeffs, state.t, dt, nonlinear, decay)
    if not np.all(np.isfinite(coeffs)):
        raise BlowUpError(t_new, "dns")

    u = project_divergence_free(state.u.replace(coeffs), t_new)
    discarded = state.discarded_energy
    if landing:
        result = remap(u, t_new)
        u = result.field  # type: ignore[assignment]
        discarded += result.discarded_energy
    return dataclasses.replace(
        state, u=u, t=t_new, discarded_energy=discarded, cfl_retries=state.cfl_retries + retries
    )


def q_fields(state: DnsState) -> VectorField:
    symbols = lab_wavenumbers(state.grid, state.shear_age)
    symbol = -sum(s * s for s in symbols)
    return state.u.replace(symbol * state.u.coeffs)


def energy(state: DnsState) -> float:
    return 0.5 * l2_norm(state.u) ** 2


def _x_mask(grid: GridSpec) -> np.ndarray:
    return np.broadcast_to(grid.mesh()[0] != 0, grid.shape)


def energy_nonzero(state: DnsState) -> float:
    coeffs = np.where(_x_mask(state.grid), state.u.coeffs, 0.0)
    return 0.5 * state.grid.volume * float(np.sum(np.abs(coeffs) ** 2))


def energy_zero(state: DnsState) -> float:
    return energy(state) - energy_nonzero(state)


def mode_energies(state: DnsState) -> Dict[int, float]:
    """Energy per |k| index (k and -k combined)."""
    grid = state.grid
    per_plane = 0.5 * grid.volume * np.sum(np.abs(state.u.coeffs) ** 2, axis=(0, 2, 3))
    out: Dict[int, float] = {}
    for n, e in zip(grid.indices(0), per_plane):
        out[abs(int(n))] = out.get(abs(int(n)), 0.0) + float(e)
    return dict(sorted(out.items()))


def divergence_max(state: DnsState) -> float:
    return float(np.max(np.abs(divergence(state.u, state.t).coeffs)))


def _plane_slice(grid: GridSpec, coeffs: np.ndarray) -> SpectralField:
    plane = grid.plane()
    return SpectralField(np.where(plane.dealias_mask, coeffs[0], 0.0), plane, Frame.LAB)


def _nonzero_physical(state: DnsState) -> List[np.ndarray]:
    coeffs = np.where(_x_mask(state.grid), state.u.coeffs, 0.0)
    return [to_physical(state.u.component(i).replace(coeffs[i])) for i in range(3)]


def forcing_functional(state: DnsState, alpha: int) -> SpectralField:
    """x-averaged forcing of component alpha (1, 2 or 3) by pairs of x-dependent modes.

    With P^{ij} = (U^i U^j)_0 over k != 0, the functional is
    -d_i d_i d_j P^{j alpha} + d_alpha d_j d_i P^{ij}, evaluated at k = 0.
    """
    grid = state.grid
    plane = grid.plane()
    u = _nonzero_physical(state)
    products = {
        (i, j): from_physical(grid, u[i] * u[j]).coeffs[0] for i in range(3) for j in range(i, 3)
    }

    def p(i: int, j: int) -> np.ndarray:
        return products[(min(i, j), max(i, j))]

    eta, l = plane.mesh()
    k = {1: 0.0, 2: eta, 3: l}
    a = alpha - 1
    first = 1j * (eta * eta + l * l) * (eta * p(1, a) + l * p(2, a))
    second = -1j * k[alpha] * (eta * eta * p(1, 1) + 2.0 * eta * l * p(1, 2) + l * l * p(2, 2))
    return SpectralField(np.where(plane.dealias_mask, first + second, 0.0), plane, Frame.LAB)


def velocity_forcing(state: DnsState, alpha: int) -> SpectralField:
    """-d_y (u2 u^alpha)_0 - d_z (u3 u^alpha)_0 over x-dependent modes, by the product rule."""
    grid = state.grid
    tau = state.shear_age
    coeffs = np.where(_x_mask(grid), state.u.coeffs, 0.0)
    symbols = [np.broadcast_to(s, grid.shape) for s in lab_wavenumbers(grid, tau)]
    u = [to_physical(state.u.component(i).replace(coeffs[i])) for i in range(3)]

    def d(i: int, axis: int) -> np.ndarray:
        return to_physical(state.u.component(i).replace(1j * symbols[axis] * coeffs[i]))

    a = alpha - 1
    values = -(d(1, 1) * u[a] + u[1] * d(a, 1)) - (d(2, 2) * u[a] + u[2] * d(a, 2))
    return _plane_slice(grid, from_physical(grid, values).coeffs)


def project_plane(fields: Sequence[SpectralField]) -> Tuple[SpectralField, SpectralField]:
    """2D Leray projection of an x-averaged (v2, v3) pair."""
    plane = fields[0].grid
    eta, l = plane.mesh()
    k_sq = eta * eta + l * l
    inv = np.where(k_sq == 0, 0.0, 1.0 / np.where(k_sq == 0, 1.0, k_sq))
    v2, v3 = fields[0].coeffs, fields[1].coeffs
    k_dot = eta * v2 + l * v3
    return fields[0].replace(v2 - eta * k_dot * inv), fields[1].replace(v3 - l * k_dot * inv)


class DnsForcingFeed:
    """x-averaged u1 forcing of a sequence of DNS states, linear in time between them.

    Callable as a coordinate-change forcing feed on the (y, z) plane of the DNS grid.
    """

    def __init__(self, states: Sequence[DnsState]) -> None:
        if not states:
            raise GridSpecError("states", len(states), "forcing feed needs at least one state")
        self.times = [s.t for s in states]
        self.forcings = [velocity_forcing(s, 1) for s in states]

    def __call__(self, t: float) -> SpectralField:
        i = bisect.bisect_right(self.times, t) - 1
        i = min(max(i, 0), len(self.times) - 1)
        if i == len(self.times) - 1 or t <= self.times[0]:
            return self.forcings[i]

        theta = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        a, b = self.forcings[i], self.forcings[i + 1]
        return a.replace((1.0 - theta) * a.coeffs + theta * b.coeffs)


class NormRecord(NamedTuple):
    t: float
    log_A: Tuple[float, float, float]
    log_A_nu: Tuple[float, float, float]
    mode_energies: Dict[int, float]
    energy_nonzero: float
    energy_zero: float


def _log_weighted_norm(log_a: np.ndarray, coeffs: np.ndarray, volume: float) -> float:
    magnitude = np.abs(coeffs)
    keep = (magnitude > 0.0) & np.isfinite(log_a)
    if not np.any(keep):
        return -math.inf
    terms = 2.0 * log_a[keep] + 2.0 * np.log(magnitude[keep])
    return 0.5 * (float(logsumexp(terms)) + math.log(volume))


def norm_series(state: DnsState, params: NormParams, bank: ProfileBank) -> NormRecord:
    """Logs of ||A^i Q^i|| and ||A^{nu;i} Q^i|| in moving-frame frequencies, with energy splits."""
    grid = state.grid
    k, eta, l = (np.broadcast_to(f, grid.shape) for f in moving_frequencies(state.u))
    bank.covers(eta)
    q = q_fields(state)
    t = max(state.t, 1e-12)

    log_a = []
    log_a_nu = []
    for i, component in enumerate((Component.ONE, Component.TWO, Component.THREE)):
        log_a.append(
            _log_weighted_norm(
                log_norm_A(component, k, eta, l, t, params), q.coeffs[i], grid.volume
            )
        )
        log_a_nu.append(
            _log_weighted_norm(
                log_norm_A(component, k, eta, l, t, params, kind=NormKind.NU),
                q.coeffs[i],
                grid.volume,
            )
        )
    return NormRecord(
        state.t,
        tuple(log_a),  # type: ignore[arg-type]
        tuple(log_a_nu),  # type: ignore[arg-type]
        mode_energies(state),
        energy_nonzero(state),
        energy_zero(state),
    )


class DnsRow(NamedTuple):
    t: float
    energy: float
    energy_nonzero: float
    energy_zero: float
    u1_zero: float
    u2_nonzero: float
    divergence: float
    discarded: float


DNS_HEADER = ["t", "E", "E_nonzero", "E_zero", "|u1_0|", "|u2_nonzero|", "div max", "discarded"]


def dns_row(state: DnsState) -> DnsRow:
    x_modes = _x_mask(state.grid)
    u1_zero = np.where(x_modes, 0.0, state.u.coeffs[0])
    u2_nonzero = np.where(x_modes, state.u.coeffs[1], 0.0)
    volume = state.grid.volume
    return DnsRow(
        state.t,
        energy(state),
        energy_nonzero(state),
        energy_zero(state),
        math.sqrt(volume * float(np.sum(np.abs(u1_zero) ** 2))),
        math.sqrt(volume * float(np.sum(np.abs(u2_nonzero) ** 2))),
        divergence_max(state),
        state.discarded_energy,
    )


def tau_decay(series: Sequence[DnsRow], factor: float = 100.0) -> Optional[float]:
    """First time E_nonzero drops below E_nonzero(0)/factor, log-linearly interpolated."""
    if not series or series[0].energy_nonzero <= 0.0:
        return None
    target = math.log(series[0].energy_nonzero / factor)
    for prev, row in zip(series, series[1:]):
        if row.energy_nonzero <= 0.0:
            return row.t
        log_e = math.log(row.energy_nonzero)
        if log_e <= target:
            log_p = math.log(prev.energy_nonzero)
            if log_p == log_e:
                return row.t
            return prev.t + (row.t - prev.t) * (log_p - target) / (log_p - log_e)
    return None


@dataclass
class DnsRun:
    final: DnsState
    series: List[DnsRow]
    events: List[str]
    blow_up_time: Optional[float] = None

    @property
    def blew_up(self) -> bool:
        return self.blow_up_time is not None


CHECKPOINT_DIR = "checkpoint"
CHECKPOINT_HASH = "config.hash"
CHECKPOINT_PROGRESS = "progress.yaml"
CHECKPOINT_SERIES = "series.csv"


class Resume(NamedTuple):
    state: DnsState
    step: int
    series: List[DnsRow]


def _write_vector(directory: str, stem: str, state: DnsState) -> None:
    os.makedirs(directory, exist_ok=True)
    for i in range(3):
        filename = os.path.join(directory, f"{stem}u{i + 1}.c3df")
        write_snapshot(filename, state.u.component(i), state.t)


def save_checkpoint(
    out_dir: str,
    state: DnsState,
    config_hash: str,
    step: int = 0,
    series: Sequence[DnsRow] = (),
) -> None:
    directory = os.path.join(out_dir, CHECKPOINT_DIR)
    _write_vector(directory, "", state)
    progress = {
        "step": int(step),
        "discarded_energy": float(state.discarded_energy),
        "cfl_retries": int(state.cfl_retries),
    }
    with open(os.path.join(directory, CHECKPOINT_PROGRESS), "w", encoding="utf-8") as yaml_file:
        yaml.safe_dump(progress, yaml_file)
    write_csv(
        os.path.join(directory, CHECKPOINT_SERIES), DNS_HEADER, series, quiet=True, overwrite=True
    )
    with open(os.path.join(directory, CHECKPOINT_HASH), "w", encoding="utf-8") as hash_file:
        hash_file.write(config_hash)


def load_resume(out_dir: str, grid: GridSpec, nu: float, config_hash: str) -> Optional[Resume]:
    """The saved state, step count and series so far when the config hash matches."""
    directory = os.path.join(out_dir, CHECKPOINT_DIR)
    hash_path = os.path.join(directory, CHECKPOINT_HASH)
    if not os.path.exists(hash_path):
        return None
    with open(hash_path, encoding="utf-8") as hash_file:
        if hash_file.read().strip() != config_hash:
            cl_tqdm_write(
                f"{WARNING} Checkpoint in {directory} belongs to another config{Fore.RESET}"
            )
            return None

    components = []
    t = 0.0
    for i in range(3):
        field, t = read_snapshot(os.path.join(directory, f"u{i + 1}.c3df"), grid)
        components.append(field)

    progress: Dict[str, float] = {}
    progress_path = os.path.join(directory, CHECKPOINT_PROGRESS)
    if os.path.exists(progress_path):
        with open(progress_path, encoding="utf-8") as yaml_file:
            progress = yaml.safe_load(yaml_file) or {}

    series: List[DnsRow] = []
    series_path = os.path.join(directory, CHECKPOINT_SERIES)
    if os.path.exists(series_path):
        series = [DnsRow(*(float(cell) for cell in row)) for row in read_csv(series_path)[1:]]

    state = DnsState(
        VectorField.from_components(*components),
        t,
        nu,
        float(progress.get("discarded_energy", 0.0)),
        int(progress.get("cfl_retries", 0)),
    )
    return Resume(state, int(progress.get("step", 0)), series)


def load_checkpoint(
    out_dir: str, grid: GridSpec, nu: float, config_hash: str
) -> Optional[DnsState]:
    """The saved state when its config hash matches, otherwise None."""
    resume = load_resume(out_dir, grid, nu, config_hash)
    return None if resume is None else resume.state


def run_dns(
    state: DnsState,
    tmax: float,
    dt: float,
    out_dir: Optional[str] = None,
    config_hash: str = "",
    series_every: int = 1,
    snapshot_every: int = 0,
    remap_periods: int = REMAP_PERIODS,
) -> DnsRun:
    """Drive dns_step to tmax.

    With out_dir, also write series.csv, events.log, snapshots and checkpoints. A run
    directory holding a checkpoint for the same config hash continues from it, and its
    series.csv is rewritten in place.
    """
    events: List[str] = []
    series: List[DnsRow] = []
    n = 0
    if out_dir is not None:
        resume = load_resume(out_dir, state.grid, state.nu, config_hash)
        if resume is not None:
            events.append(f"resumed at t={resume.state.t:.6g}")
            state, n, series = resume

    if not series:
        series = [dns_row(state)]
    blow_up_time = None
    steps = int(math.ceil((tmax - state.t) / dt - 1e-9))
    debug_print(f"dns: grid={state.grid.shape} nu={state.nu} dt={dt} steps={steps}")

    progress = tqdm(total=steps, unit="step", desc="dns", disable=disable_tqdm())
    while state.t < tmax - 1e-12:
        previous = state
        try:
            state = dns_step(state, min(dt, tmax - state.t), remap_periods)
        except BlowUpError as e:
            blow_up_time = e.t
            events.append(f"blow-up at t={e.t:.6g}")
            cl_tqdm_write(f"{WARNING} {e}{Fore.RESET}")
            break
        n += 1
        progress.update(1)

        if state.u.t_remap != previous.u.t_remap:
            lost = state.discarded_energy - previous.discarded_energy
            events.append(f"remap at t={state.t:.6g} discarded={lost:.3e}")
        if state.cfl_retries != previous.cfl_retries:
            events.append(f"cfl retry at t={previous.t:.6g}")

        if n % series_every == 0 or state.t >= tmax - 1e-12:
            series.append(dns_row(state))
        if out_dir is not None and snapshot_every and n % snapshot_every == 0:
            _write_vector(os.path.join(out_dir, "snapshots"), f"{n:06d}_", state)
            save_checkpoint(out_dir, state, config_hash, n, series)
    progress.close()

    if out_dir is not None:
        write_csv(os.path.join(out_dir, "series.csv"), DNS_HEADER, series, overwrite=True)
        with open(os.path.join(out_dir, "events.log"), "a", encoding="utf-8") as log_file:
            for event in events:
                log_file.write(f"{event}\n")
    return DnsRun(state, series, events, blow_up_time)


def embed_plane(
    grid: GridSpec, u1: SpectralField, u2: SpectralField, u3: SpectralField
) -> VectorField:
    """x-independent 3D velocity from (y, z) plane fields."""
    if not isinstance(u1.grid, PlaneSpec) or u1.grid != grid.plane():
        raise GridSpecError("plane", u1.grid, "must be the (y, z) plane of the 3D grid")
    coeffs = grid.zeros(3)
    for i, f in enumerate((u1, u2, u3)):
        coeffs[i, 0] = f.coeffs
    return VectorField(coeffs, grid, Frame.SHEAR, 0.0)
