# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.fft
from colorama import Fore
from scipy.special import logsumexp

from .cl_types import Frame
from .config import config
from .constants import WARNING
from .exceptions import FrameError, GridSpecError, NormRangeError, RemapAlignmentError
from .utils import cl_tqdm_write

TWO_PI = 2.0 * math.pi
LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class _SpectralGrid:
    """Shared lattice logic for the 3D box and the 2D (y, z) plane.

    Coefficients are stored in FFT order and normalised so that
    f(x) = sum c_n exp(i k_n x), i.e. c = fftn(f) / N.
    """

    dealias: float

    @property
    def shape(self) -> Tuple[int, ...]:
        raise NotImplementedError

    @property
    def lengths(self) -> Tuple[float, ...]:
        raise NotImplementedError

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def fft_axes(self) -> Tuple[int, ...]:
        return tuple(range(-self.ndim, 0))

    def indices(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(int)

    def wavenumbers(self, axis: int) -> np.ndarray:
        return (TWO_PI / self.lengths[axis]) * self.indices(axis)

    def index_mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.ix_(*[self.indices(a) for a in range(self.ndim)]))

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.ix_(*[self.wavenumbers(a) for a in range(self.ndim)]))

    def points(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return np.arange(n) * (self.lengths[axis] / n)

    def physical_mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*[self.points(a) for a in range(self.ndim)], indexing="ij"))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for axis, index in enumerate(self.index_mesh()):
            mask = mask & (np.abs(index) < self.dealias * self.shape[axis] / 2)
        return mask

    def zeros(self, components: Optional[int] = None) -> np.ndarray:
        if components is None:
            return np.zeros(self.shape, dtype=complex)
        return np.zeros((components,) + self.shape, dtype=complex)

    def _validate(self) -> None:
        for name, n in zip(self._n_names(), self.shape):
            if n <= 0 or n % 2:
                raise GridSpecError(name, n, "must be a positive even integer")
        for name, length in zip(self._l_names(), self.lengths):
            if not length > 0:
                raise GridSpecError(name, length, "must be positive")
        if not 0.0 < self.dealias <= 1.0:
            raise GridSpecError("dealias", self.dealias, "must be in (0, 1]")

    def _n_names(self) -> Tuple[str, ...]:
        raise NotImplementedError

    def _l_names(self) -> Tuple[str, ...]:
        raise NotImplementedError


@dataclass(frozen=True)
class GridSpec(_SpectralGrid):
    nx: int
    ny: int
    nz: int
    lx: float = TWO_PI
    ly: float = 2.0 * TWO_PI
    lz: float = TWO_PI
    dealias: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        self._validate()
        ratio = self.lx / self.ly
        if abs(float(Fraction(ratio).limit_denominator(1000)) - ratio) > 1e-12 * ratio:
            raise GridSpecError("lx/ly", ratio, "must be rational for exact remapping")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.nx, self.ny, self.nz)

    @property
    def lengths(self) -> Tuple[float, ...]:
        return (self.lx, self.ly, self.lz)

    @property
    def remap_period(self) -> float:
        return self.lx / self.ly

    def plane(self) -> "PlaneSpec":
        return PlaneSpec(self.ny, self.nz, self.ly, self.lz, self.dealias)

    def _n_names(self) -> Tuple[str, ...]:
        return ("nx", "ny", "nz")

    def _l_names(self) -> Tuple[str, ...]:
        return ("lx", "ly", "lz")


@dataclass(frozen=True)
class PlaneSpec(_SpectralGrid):
    ny: int
    nz: int
    ly: float = 2.0 * TWO_PI
    lz: float = TWO_PI
    dealias: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        self._validate()

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.ny, self.nz)

    @property
    def lengths(self) -> Tuple[float, ...]:
        return (self.ly, self.lz)

    def _n_names(self) -> Tuple[str, ...]:
        return ("ny", "nz")

    def _l_names(self) -> Tuple[str, ...]:
        return ("ly", "lz")


AnyGrid = Union[GridSpec, PlaneSpec]


@dataclass(frozen=True)
class SpectralField:
    coeffs: np.ndarray
    grid: AnyGrid
    frame: Frame = Frame.SHEAR
    t_remap: float = 0.0

    def replace(self, coeffs: np.ndarray) -> "SpectralField":
        return dataclasses.replace(self, coeffs=coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return self.replace(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_compatible(self, other)
        return self.replace(self.coeffs - other.coeffs)

    def scale(self, factor: complex) -> "SpectralField":
        return self.replace(self.coeffs * factor)


@dataclass(frozen=True)
class VectorField:
    coeffs: np.ndarray
    grid: AnyGrid
    frame: Frame = Frame.SHEAR
    t_remap: float = 0.0

    @classmethod
    def from_components(cls, *components: SpectralField) -> "VectorField":
        first = components[0]
        for c in components[1:]:
            _check_compatible(first, c)
        return cls(
            np.stack([c.coeffs for c in components]), first.grid, first.frame, first.t_remap
        )

    def component(self, i: int) -> SpectralField:
        return SpectralField(self.coeffs[i], self.grid, self.frame, self.t_remap)

    def replace(self, coeffs: np.ndarray) -> "VectorField":
        return dataclasses.replace(self, coeffs=coeffs)


AnyField = Union[SpectralField, VectorField]


class RemapResult(NamedTuple):
    field: AnyField
    discarded_energy: float


def _check_compatible(a: AnyField, b: AnyField) -> None:
    if a.grid != b.grid:
        raise FrameError(f"{a.grid}", f"{b.grid}")
    if a.frame != b.frame or a.t_remap != b.t_remap:
        raise FrameError(
            f"{a.frame.name} (t_remap={a.t_remap})", f"{b.frame.name} (t_remap={b.t_remap})"
        )


Real = Union[float, np.ndarray]


def shear_wavenumber(k: Real, eta: Real, l: Real, t: Real) -> Tuple[Real, Real, Real]:
    return k, eta - t * k, l


def laplacian_L_symbol(k: Real, eta: Real, l: Real, t: Real) -> Real:
    _, eta_t, _ = shear_wavenumber(k, eta, l, t)
    return -(k * k + eta_t * eta_t + l * l)


def shear_age(field: AnyField, t: float) -> float:
    if field.frame is Frame.LAB:
        return 0.0
    return t - field.t_remap


def lab_wavenumbers(grid: AnyGrid, tau: float) -> Tuple[np.ndarray, ...]:
    """Effective (lab-frame) wavenumbers of each stored coefficient at shear age tau."""
    if isinstance(grid, PlaneSpec):
        return grid.mesh()
    k, eta, l = grid.mesh()
    return shear_wavenumber(k, eta, l, tau)


def moving_frequencies(field: AnyField) -> Tuple[np.ndarray, ...]:
    """Frequencies with respect to X = x - t y, undoing the remap re-indexing."""
    if isinstance(field.grid, PlaneSpec):
        return field.grid.mesh()
    k, eta, l = field.grid.mesh()
    return k, eta + k * field.t_remap, l


def to_physical(field: AnyField) -> np.ndarray:
    return scipy.fft.ifftn(
        field.coeffs, axes=field.grid.fft_axes, norm="forward", workers=config.fft_workers
    ).real


def from_physical(
    grid: AnyGrid, values: np.ndarray, frame: Frame = Frame.SHEAR, t_remap: float = 0.0
) -> SpectralField:
    coeffs = scipy.fft.fftn(values, axes=grid.fft_axes, norm="forward", workers=config.fft_workers)
    return SpectralField(coeffs, grid, frame, t_remap)


def dealias(field: AnyField) -> AnyField:
    return field.replace(np.where(field.grid.dealias_mask, field.coeffs, 0.0))


def dealiased_product(a: SpectralField, b: SpectralField) -> SpectralField:
    _check_compatible(a, b)
    product = from_physical(a.grid, to_physical(a) * to_physical(b), a.frame, a.t_remap)
    return dealias(product)  # type: ignore[return-value]


def derivative(field: AnyField, axis: int, t: float) -> AnyField:
    symbols = lab_wavenumbers(field.grid, shear_age(field, t))
    return field.replace(1j * symbols[axis] * field.coeffs)


def laplacian(field: AnyField, t: float) -> AnyField:
    symbols = lab_wavenumbers(field.grid, shear_age(field, t))
    return field.replace(-sum(s * s for s in symbols) * field.coeffs)


def divergence(u: VectorField, t: float) -> SpectralField:
    symbols = lab_wavenumbers(u.grid, shear_age(u, t))
    coeffs = sum(1j * s * u.coeffs[i] for i, s in enumerate(symbols))
    return SpectralField(np.asarray(coeffs), u.grid, u.frame, u.t_remap)


def l2_norm(field: AnyField) -> float:
    return math.sqrt(field.grid.volume * float(np.sum(np.abs(field.coeffs) ** 2)))


def gevrey_norm(field: SpectralField, lam: float, sigma: float, s: float) -> float:
    freqs = moving_frequencies(field)
    size = sum(np.abs(f) for f in freqs)
    bracket_sq = 1.0 + sum(f * f for f in freqs)
    amplitude = np.abs(field.coeffs)
    nonzero = amplitude > 0
    if not np.any(nonzero):
        return 0.0

    log_terms = (
        2.0 * lam * np.broadcast_to(size, field.grid.shape) ** s
        + sigma * np.log(np.broadcast_to(bracket_sq, field.grid.shape))
        + 2.0 * np.log(np.where(nonzero, amplitude, 1.0))
    )
    log_norm = 0.5 * (logsumexp(log_terms[nonzero]) + math.log(TWO_PI / field.grid.lengths[-2]))
    if not np.isfinite(log_norm) or log_norm > LOG_FLOAT_MAX:
        raise NormRangeError("gevrey_norm", float(log_norm))
    return math.exp(log_norm)


def project_divergence_free(u: VectorField, t: float) -> VectorField:
    if u.frame is not Frame.SHEAR:
        raise FrameError(Frame.SHEAR.name, u.frame.name)

    symbols = [np.broadcast_to(s, u.grid.shape) for s in lab_wavenumbers(u.grid, t - u.t_remap)]
    k_sq = sum(s * s for s in symbols)
    zero = k_sq == 0
    inv_k_sq = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, k_sq))
    k_dot_u = sum(s * u.coeffs[i] for i, s in enumerate(symbols))
    coeffs = np.stack([u.coeffs[i] - s * k_dot_u * inv_k_sq for i, s in enumerate(symbols)])
    return u.replace(coeffs)


def remap(field: AnyField, t: float) -> RemapResult:
    grid = field.grid
    if not isinstance(grid, GridSpec):
        raise FrameError("3D", "2D")
    if field.frame is not Frame.SHEAR:
        raise FrameError(Frame.SHEAR.name, field.frame.name)

    shifts = (t - field.t_remap) / grid.remap_period
    m = int(round(shifts))
    if abs(shifts - m) > 1e-9:
        raise RemapAlignmentError(t, field.t_remap, grid.remap_period)
    if m == 0:
        return RemapResult(dataclasses.replace(field, t_remap=t), 0.0)

    old = field.coeffs
    new = np.zeros_like(old)
    eta_index = grid.indices(1)
    half = grid.ny // 2
    for kx_pos, n_k in enumerate(grid.indices(0)):
        target = eta_index - n_k * m
        valid = (target >= -half) & (target < half)
        new[..., kx_pos, target[valid] % grid.ny, :] = old[..., kx_pos, valid, :]

    new = np.where(grid.dealias_mask, new, 0.0)
    discarded = grid.volume * float(np.sum(np.abs(old) ** 2) - np.sum(np.abs(new) ** 2))
    discarded = max(discarded, 0.0)
    if discarded > 0.0:
        cl_tqdm_write(
            f"{WARNING} Remap at t={t:.6g} discarded energy {discarded:.3e}{Fore.RESET}"
        )
    return RemapResult(dataclasses.replace(field, coeffs=new, t_remap=t), discarded)


def evaluate_at(field: SpectralField, points: Tuple[np.ndarray, ...]) -> np.ndarray:
    """Exact trigonometric interpolation of field at arbitrary points (field coordinates)."""
    grid = field.grid
    exps = [
        np.exp(1j * np.multiply.outer(np.ravel(p), grid.wavenumbers(a)))
        for a, p in enumerate(points)
    ]
    if grid.ndim == 2:
        values = np.einsum("pa,pb,ab->p", exps[0], exps[1], field.coeffs, optimize=True)
    else:
        values = np.einsum(
            "pa,pb,pc,abc->p", exps[0], exps[1], exps[2], field.coeffs, optimize=True
        )
    return values.reshape(np.shape(points[0]))


def sample_lab(
    field: SpectralField, t: float, x: np.ndarray, y: np.ndarray, z: np.ndarray
) -> np.ndarray:
    tau = shear_age(field, t)
    return evaluate_at(field, (x - tau * y, y, z))


def hermitian_part(coeffs: np.ndarray, ndim: int) -> np.ndarray:
    axes = tuple(range(-ndim, 0))
    mirrored = np.conj(np.roll(np.flip(coeffs, axis=axes), 1, axis=axes))
    return 0.5 * (coeffs + mirrored)


def hermitian_defect(field: AnyField) -> float:
    scale = float(np.max(np.abs(field.coeffs))) or 1.0
    sym = hermitian_part(field.coeffs, field.grid.ndim)
    return float(np.max(np.abs(field.coeffs - sym))) / scale
