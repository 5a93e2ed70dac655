import numpy as np
import pytest

from models.errors import ModelDimensionError
from models.fields import FieldSpec, FourierTerm, eval_field, eval_field_gradient, eval_field_hessian, wrap


def _sine(amplitude=1.0, constant=0.0):
    return FieldSpec(constant=constant, terms=(FourierTerm(k=(1,), sin=amplitude),))


def test_constant_field_ignores_position():
    f = FieldSpec.constant_field(2.5)

    assert eval_field(f, [0.3], d=1) == 2.5
    assert f.is_constant
    np.testing.assert_allclose(eval_field(f, np.array([[0.1, 0.2], [0.7, 0.9]]), d=2), [2.5, 2.5])


def test_trig_field_value_and_periodicity():
    f = _sine(constant=1.0)

    assert eval_field(f, [0.25]) == pytest.approx(2.0)
    assert eval_field(f, [3.25]) == pytest.approx(eval_field(f, [0.25]))
    assert eval_field(f, [-0.75]) == pytest.approx(2.0)


def test_wrap_maps_onto_unit_interval():
    np.testing.assert_allclose(wrap([-0.25, 1.0, 2.5]), [0.75, 0.0, 0.5])
    assert np.all(wrap(np.array([-1e-18])) < 1.0)


def test_gradient_and_hessian_of_single_modes():
    sine = _sine()
    cosine = FieldSpec(terms=(FourierTerm(k=(1,), cos=1.0),))

    np.testing.assert_allclose(eval_field_gradient(sine, [0.0]), [2 * np.pi])
    np.testing.assert_allclose(eval_field_hessian(cosine, [0.0]), [[-(2 * np.pi) ** 2]])


def test_two_dimensional_wavevector():
    f = FieldSpec(terms=(FourierTerm(k=(1, 1), cos=1.0),))

    assert eval_field(f, [0.25, 0.25]) == pytest.approx(-1.0)
    np.testing.assert_allclose(eval_field_gradient(f, [0.0, 0.0]), [0.0, 0.0], atol=1e-12)


def test_dimension_mismatch_is_rejected():
    f = FieldSpec(terms=(FourierTerm(k=(1, 0), cos=1.0),))

    with pytest.raises(ModelDimensionError):
        eval_field(f, [0.5])
    with pytest.raises(ModelDimensionError):
        FieldSpec(terms=(FourierTerm(k=(1,), cos=1.0), FourierTerm(k=(1, 1), cos=1.0)))


def test_gradient_matches_centered_differences():
    f = FieldSpec(
        constant=1.5,
        terms=(
            FourierTerm(k=(1, 0), cos=3.0, sin=-2.0),
            FourierTerm(k=(2, -1), cos=-7.5, sin=4.0),
            FourierTerm(k=(0, 2), sin=10.0),
        ),
    )
    points = np.random.default_rng(4).random((20, 2))
    delta = 1e-5

    gradient = eval_field_gradient(f, points)
    hessian = eval_field_hessian(f, points)
    for j, step in enumerate(np.eye(2) * delta):
        forward, backward = eval_field(f, points + step), eval_field(f, points - step)
        centered = (forward - backward) / (2 * delta)
        scale = np.maximum(np.linalg.norm(gradient, axis=1), 1.0)
        assert np.all(np.abs(centered - gradient[:, j]) <= 1e-6 * scale)

        second = (eval_field_gradient(f, points + step) - eval_field_gradient(f, points - step)) / (2 * delta)
        np.testing.assert_allclose(second, hessian[:, :, j], rtol=1e-6, atol=1e-6 * np.abs(hessian).max())
