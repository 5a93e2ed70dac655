import numpy as np
import pytest

from config.run_config import load_run_config
from models.errors import ModelDimensionError
from models.grid import GridFunction, build_grid
from models.operators import apply_adjoint, apply_jump, assemble_generator, carre_du_champ
from models.switching import make_model


def _model(preset):
    return load_run_config(preset=preset).model


def _smooth_pair(x):
    two_pi = 2 * np.pi
    f = np.stack([np.sin(two_pi * x), np.cos(two_pi * x)], axis=1)
    df = np.stack([two_pi * np.cos(two_pi * x), -two_pi * np.sin(two_pi * x)], axis=1)
    d2f = -(two_pi**2) * f
    return f, df, d2f


def test_generator_annihilates_constants():
    model = _model("two-mode-periodic-2d")
    op = assemble_generator(model, build_grid(2, (16, 16)))

    assert op.size == 16 * 16 * 2
    np.testing.assert_allclose(op.matrix @ np.ones(op.size), 0.0, atol=1e-9)


def test_generator_is_second_order_consistent():
    model = _model("two-mode-periodic")
    errors = []
    for n in (32, 64, 128):
        grid = build_grid(1, (n,))
        points = grid.coordinates
        f, df, d2f = _smooth_pair(points[:, 0])
        exact = (
            model.drift_at(points)[:, :, 0] * df
            + 0.5 * model.diffusion_at(points)[:, :, 0, 0] * d2f
            + np.einsum("nab,nb->na", model.rates_at(points), f)
        )
        discrete = assemble_generator(model, grid).apply(GridFunction.from_nodal(f)).by_mode()
        errors.append(np.abs(discrete - exact).max())

    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all((orders > 1.8) & (orders < 2.2))


def test_cross_stencil_matches_mixed_derivative():
    model = make_model(drift=[[0.0, 0.0]], sigma=[[[1.0, 0.0], [0.6, 0.8]]])
    grid = build_grid(2, (64, 64))
    x, y = grid.coordinates[:, 0], grid.coordinates[:, 1]
    f = np.sin(2 * np.pi * (x + y))
    # a = [[1, 0.6], [0.6, 1]]; L f = 0.5 * sum_jk a_jk d_j d_k f
    exact = -0.5 * (2 * np.pi) ** 2 * (1.0 + 2 * 0.6 + 1.0) * f

    discrete = assemble_generator(model, grid).apply(GridFunction(f)).values

    assert np.abs(discrete - exact).max() <= 0.005 * np.abs(exact).max()


def test_adjoint_is_matrix_transpose():
    model = _model("two-mode-periodic")
    grid = build_grid(1, (16,))
    op = assemble_generator(model, grid)
    v = GridFunction(np.random.default_rng(1).random(op.size), 2)

    np.testing.assert_allclose(apply_adjoint(op, v).values, op.matrix.T @ v.values)


def test_carre_du_champ_identity():
    model = _model("two-mode-periodic")
    grid = build_grid(1, (16,))
    pair, _, _ = _smooth_pair(grid.coordinates[:, 0])
    f = GridFunction.from_nodal(pair + 0.3)
    g = GridFunction.from_nodal(pair[:, ::-1] ** 2)

    product = apply_jump(model, grid, GridFunction(f.values * g.values, 2)).values
    expected = product - f.values * apply_jump(model, grid, g).values - g.values * apply_jump(model, grid, f).values

    np.testing.assert_allclose(carre_du_champ(model, grid, f, g).values, expected, atol=1e-12)
    assert carre_du_champ(model, grid, f, f).values.min() >= 0


def test_high_peclet_number_is_warned():
    model = make_model(drift=[[100.0]], sigma=[[[0.1]]])

    op = assemble_generator(model, build_grid(1, (8,)))

    assert any("Peclet" in message for message in op.warnings)


def test_coo_export_lists_every_nonzero():
    op = assemble_generator(_model("telegraph"), build_grid(1, (8,)))
    frame = op.to_coo_frame()

    assert list(frame.columns) == ["row", "col", "value"]
    assert len(frame) == op.matrix.nnz


def test_dimension_mismatch_is_rejected():
    with pytest.raises(ModelDimensionError):
        assemble_generator(_model("telegraph"), build_grid(2, (8, 8)))


def test_hand_computed_second_difference_row():
    # a = 2, h = 1/4: (a / 2) / h^2 * [1, -2, 1]
    model = make_model(drift=[[0.0]], sigma=[[[np.sqrt(2.0)]]])

    dense = assemble_generator(model, build_grid(1, (4,))).matrix.toarray()

    np.testing.assert_allclose(dense[0], [-32.0, 16.0, 0.0, 16.0], rtol=1e-12)
    for i in range(4):
        np.testing.assert_allclose(np.roll(dense[i], -i), [-32.0, 16.0, 0.0, 16.0], rtol=1e-12)


def test_adjoint_pairs_with_generator():
    model = _model("two-mode-periodic-2d")
    op = assemble_generator(model, build_grid(2, (8, 8)))
    rng = np.random.default_rng(5)
    u = GridFunction(rng.standard_normal(op.size), 2)
    v = GridFunction(rng.standard_normal(op.size), 2)

    Au = op.apply(u).values
    left = np.dot(apply_adjoint(op, v).values, u.values)
    right = np.dot(v.values, Au)

    assert abs(left - right) <= 1e-12 * np.linalg.norm(v.values) * np.linalg.norm(Au)


def test_jump_operator_vanishes_without_switching():
    model = make_model(drift=[[0.0], [1.0]], sigma=[[[1.0]], [[1.0]]])
    grid = build_grid(1, (8,))
    f = GridFunction(np.random.default_rng(2).random(16), 2)

    np.testing.assert_array_equal(apply_jump(model, grid, f).values, 0.0)
