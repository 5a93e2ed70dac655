import numpy as np
import pytest

from models.errors import GridError, ModelDimensionError
from models.fields import FieldSpec, FourierTerm
from models.grid import (
    CoefficientSelector,
    GridFunction,
    build_grid,
    gradient,
    interpolate,
    neighbor,
    quadrature,
    sample_field,
)
from models.switching import make_model


def test_build_grid_rejects_coarse_or_mismatched_axes():
    with pytest.raises(GridError):
        build_grid(2, (3, 8))
    with pytest.raises(GridError):
        build_grid(1, (8, 8))


def test_nodes_are_row_major():
    grid = build_grid(2, (4, 8))

    assert grid.size == 32
    assert grid.weight == pytest.approx(1 / 32)
    np.testing.assert_allclose(grid.coordinates[1], [0.0, 0.125])
    np.testing.assert_allclose(grid.coordinates[8], [0.25, 0.0])


def test_neighbor_wraps_periodically():
    grid = build_grid(2, (4, 8))

    assert neighbor(grid, 0, 0, -1) == 24
    assert neighbor(grid, 7, 1, 1) == 0
    np.testing.assert_array_equal(grid.neighbor_indices(1, 1)[:8], [1, 2, 3, 4, 5, 6, 7, 0])


def test_quadrature_of_constants_and_modes():
    grid = build_grid(1, (16,))
    ones = GridFunction(np.ones(32), n_modes=2)
    sine = GridFunction(np.sin(2 * np.pi * grid.coordinates[:, 0]))

    assert quadrature(grid, ones) == pytest.approx(2.0)
    assert quadrature(grid, sine) == pytest.approx(0.0, abs=1e-14)


def test_quadrature_is_exact_for_trigonometric_polynomials():
    grid = build_grid(1, (64,))
    squared = GridFunction(np.sin(2 * np.pi * grid.coordinates[:, 0]) ** 2)

    assert abs(quadrature(grid, squared) - 0.5) <= 1e-14


def test_grid_function_layout():
    f = GridFunction.from_nodal(np.array([[1.0, 2.0], [3.0, 4.0]]))

    np.testing.assert_array_equal(f.values, [1.0, 2.0, 3.0, 4.0])
    assert f.n_nodes == 2
    np.testing.assert_array_equal(f.by_mode()[:, 1], [2.0, 4.0])
    with pytest.raises(GridError):
        GridFunction(np.ones(3), n_modes=2)


def test_sample_field_selects_coefficients():
    model = make_model(
        drift=[[FieldSpec(terms=(FourierTerm(k=(1,), sin=1.0),))], [-1.0]],
        sigma=[[[2.0]], [[1.0]]],
        intensities={(1, 2): 0.5, (2, 1): 1.5},
    )
    grid = build_grid(1, (8,))

    drift = sample_field(grid, model, CoefficientSelector.drift(1))
    np.testing.assert_allclose(drift.by_mode()[2], [1.0, -1.0])
    np.testing.assert_allclose(sample_field(grid, model, CoefficientSelector.diffusion(1, 1, mode=1)).values, 4.0)
    np.testing.assert_allclose(sample_field(grid, model, CoefficientSelector.intensity(2, 1)).values, 1.5)

    with pytest.raises(ModelDimensionError):
        sample_field(grid, model, CoefficientSelector.drift(2))
    with pytest.raises(ModelDimensionError):
        sample_field(grid, model, CoefficientSelector.intensity(1, 1))


def test_centered_gradient_is_second_order():
    errors = []
    for n in (32, 64):
        grid = build_grid(1, (n,))
        x = grid.coordinates[:, 0]
        d_f = gradient(grid, GridFunction(np.sin(2 * np.pi * x)))
        errors.append(np.abs(d_f[0] - 2 * np.pi * np.cos(2 * np.pi * x)).max())

    assert np.log2(errors[0] / errors[1]) == pytest.approx(2.0, abs=0.1)


def test_interpolation_is_exact_at_nodes_and_periodic():
    grid = build_grid(2, (8, 8))
    values = np.sin(2 * np.pi * grid.coordinates[:, 0]) + grid.coordinates[:, 1] ** 2
    f = GridFunction(values)

    np.testing.assert_allclose(interpolate(grid, f, grid.coordinates)[:, 0], values, atol=1e-12)
    np.testing.assert_allclose(
        interpolate(grid, f, [[1.25, -1.0]]), interpolate(grid, f, [[0.25, 0.0]]), atol=1e-12
    )
