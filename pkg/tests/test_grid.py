import math

import numpy as np
import pytest

from couettelab.cl_types import Frame
from couettelab.exceptions import FrameError, GridSpecError, RemapAlignmentError
from couettelab.grid import (
    TWO_PI,
    GridSpec,
    PlaneSpec,
    SpectralField,
    VectorField,
    dealias,
    dealiased_product,
    derivative,
    divergence,
    evaluate_at,
    from_physical,
    gevrey_norm,
    hermitian_defect,
    hermitian_part,
    l2_norm,
    laplacian,
    laplacian_L_symbol,
    project_divergence_free,
    remap,
    sample_lab,
    shear_wavenumber,
    to_physical,
)


def _single_mode(grid: GridSpec, index: tuple, value: complex = 1.0) -> SpectralField:
    coeffs = grid.zeros()
    coeffs[index] = value
    return SpectralField(coeffs, grid)


def test_grid_spec_defaults() -> None:
    grid = GridSpec(8, 16, 8)
    assert grid.shape == (8, 16, 8)
    assert grid.volume == pytest.approx(TWO_PI * 2 * TWO_PI * TWO_PI)
    assert grid.remap_period == pytest.approx(0.5)
    assert grid.plane() == PlaneSpec(16, 8)


def test_grid_spec_rejects_odd_size() -> None:
    with pytest.raises(GridSpecError) as excinfo:
        GridSpec(7, 16, 8)
    assert excinfo.value.name == "nx"


def test_grid_spec_rejects_irrational_ratio() -> None:
    with pytest.raises(GridSpecError):
        GridSpec(8, 8, 8, lx=TWO_PI, ly=math.sqrt(2.0))


def test_plane_spec_rejects_bad_dealias() -> None:
    with pytest.raises(GridSpecError):
        PlaneSpec(8, 8, dealias=1.5)


def test_shear_wavenumber() -> None:
    assert shear_wavenumber(1, 3, 0, 3) == (1, 0, 0)


def test_laplacian_symbol() -> None:
    value = laplacian_L_symbol(2, 100, 1, 125.0 / 3.0)
    assert value == pytest.approx(-(4 + (100 - 250.0 / 3.0) ** 2 + 1))
    assert value == pytest.approx(-282.78, abs=1e-2)


def test_dealias_mask_is_strict() -> None:
    grid = PlaneSpec(6, 6, dealias=2.0 / 3.0)
    # |n| < 2 survives, |n| = 2 does not
    assert grid.dealias_mask[1, 1]
    assert not grid.dealias_mask[2, 0]
    assert not grid.dealias_mask[-2, 0]


def test_fft_round_trip_normalisation() -> None:
    grid = PlaneSpec(8, 8, ly=TWO_PI)
    y, z = grid.physical_mesh()
    field = from_physical(grid, np.cos(y) + 0.5 * np.sin(2 * z))
    assert abs(field.coeffs[1, 0] - 0.5) < 1e-12
    assert abs(field.coeffs[0, 2] + 0.25j) < 1e-12
    assert np.allclose(to_physical(field), np.cos(y) + 0.5 * np.sin(2 * z))
    assert hermitian_defect(field) < 1e-14


def test_l2_norm_of_cosine() -> None:
    grid = PlaneSpec(8, 8, ly=TWO_PI)
    y, _ = grid.physical_mesh()
    field = from_physical(grid, np.cos(y))
    # ||cos y||^2 = Ly * Lz / 2
    assert l2_norm(field) == pytest.approx(math.sqrt(grid.volume / 2.0))


def test_derivative_in_shear_frame() -> None:
    grid = GridSpec(8, 16, 8)
    field = _single_mode(grid, (1, 3, 0))
    k, eta, _ = grid.mesh()
    d_y = derivative(field, 1, 2.0)
    expected = 1j * (eta[0, 3, 0] - 2.0 * k[1, 0, 0])
    assert d_y.coeffs[1, 3, 0] == pytest.approx(expected)


def test_laplacian_matches_symbol() -> None:
    grid = GridSpec(8, 16, 8)
    field = _single_mode(grid, (1, 2, 1))
    k, eta, l = (float(m.ravel()[i]) for m, i in zip(grid.mesh(), (1, 2, 1)))
    result = laplacian(field, 0.7)
    assert result.coeffs[1, 2, 1] == pytest.approx(laplacian_L_symbol(k, eta, l, 0.7))


def test_field_arithmetic_checks_frame() -> None:
    grid = PlaneSpec(8, 8)
    a = SpectralField(grid.zeros(), grid)
    b = SpectralField(grid.zeros(), grid, Frame.LAB)
    with pytest.raises(FrameError):
        a + b


def test_dealiased_product_of_cosines() -> None:
    grid = PlaneSpec(16, 16, ly=TWO_PI)
    y, _ = grid.physical_mesh()
    a = from_physical(grid, np.cos(y))
    product = dealiased_product(a, a)
    assert np.allclose(to_physical(product), 0.5 + 0.5 * np.cos(2 * y))


def test_dealias_removes_high_modes() -> None:
    grid = PlaneSpec(6, 6)
    coeffs = grid.zeros()
    coeffs[2, 0] = 1.0
    coeffs[1, 1] = 1.0
    result = dealias(SpectralField(coeffs, grid))
    assert result.coeffs[2, 0] == 0.0
    assert result.coeffs[1, 1] == 1.0


def test_projection_is_divergence_free() -> None:
    grid = GridSpec(8, 16, 8)
    rng = np.random.default_rng(3)
    coeffs = rng.normal(size=(3,) + grid.shape) + 1j * rng.normal(size=(3,) + grid.shape)
    u = VectorField(coeffs, grid)
    projected = project_divergence_free(u, 1.3)
    assert np.max(np.abs(divergence(projected, 1.3).coeffs)) < 1e-10


def test_projection_requires_shear_frame() -> None:
    grid = GridSpec(8, 16, 8)
    u = VectorField(grid.zeros(3), grid, Frame.LAB)
    with pytest.raises(FrameError):
        project_divergence_free(u, 0.0)


def test_remap_shifts_eta_index() -> None:
    grid = GridSpec(8, 16, 8, lx=TWO_PI, ly=TWO_PI)
    field = _single_mode(grid, (1, 3, 0), 0.25)
    result = remap(field, 1.0)
    assert result.discarded_energy == 0.0
    assert result.field.t_remap == 1.0
    assert result.field.coeffs[1, 2, 0] == 0.25
    assert result.field.coeffs[1, 3, 0] == 0.0


def test_remap_preserves_lab_values() -> None:
    grid = GridSpec(8, 16, 8, lx=TWO_PI, ly=TWO_PI)
    field = _single_mode(grid, (1, 1, 1), 0.5)
    x = np.array([0.3, 1.1])
    y = np.array([2.0, 0.4])
    z = np.array([0.9, 5.0])
    before = sample_lab(field, 1.0, x, y, z)
    after = sample_lab(remap(field, 1.0).field, 1.0, x, y, z)
    assert np.allclose(before, after)


def test_remap_misaligned() -> None:
    grid = GridSpec(8, 16, 8, lx=TWO_PI, ly=TWO_PI)
    field = _single_mode(grid, (1, 1, 0))
    with pytest.raises(RemapAlignmentError):
        remap(field, 0.5)


def test_remap_discards_modes_outside_band() -> None:
    grid = GridSpec(8, 8, 8, lx=TWO_PI, ly=TWO_PI)
    field = _single_mode(grid, (1, -2, 0))
    result = remap(field, 1.0)
    assert result.discarded_energy > 0.0
    assert not np.any(result.field.coeffs)


def test_evaluate_at_grid_points() -> None:
    grid = PlaneSpec(8, 8)
    y, z = grid.physical_mesh()
    values = np.sin(y) * np.cos(z)
    field = from_physical(grid, values)
    assert np.allclose(evaluate_at(field, (y, z)).real, values)


def test_gevrey_norm_single_mode() -> None:
    grid = PlaneSpec(8, 8)
    coeffs = grid.zeros()
    coeffs[0, 1] = 1.0
    field = SpectralField(coeffs, grid)
    expected = math.sqrt(TWO_PI / grid.ly * math.exp(2.0 * 0.5) * 2.0**3)
    assert gevrey_norm(field, 0.5, 3.0, 0.6) == pytest.approx(expected)


def test_hermitian_part_gives_real_field() -> None:
    plane = PlaneSpec(8, 8)
    rng = np.random.default_rng(1)
    coeffs = rng.standard_normal(plane.shape) + 1j * rng.standard_normal(plane.shape)
    field = SpectralField(hermitian_part(coeffs, 2), plane, Frame.LAB)
    assert hermitian_defect(field) < 1e-14
    values = np.fft.ifftn(field.coeffs, norm="forward")
    assert np.max(np.abs(values.imag)) < 1e-12
