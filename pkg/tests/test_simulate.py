from dataclasses import replace

import numpy as np
import pytest

from analysis.simulate import (
    PathSample,
    SimConfig,
    path_rng,
    rescale_path,
    sample_switch,
    simulate_micro_path,
    simulate_paths,
)
from models.errors import HorizonError, SimulationConfigError, SimulationError
from models.fields import FieldSpec, FourierTerm
from models.switching import make_model


def _telegraph():
    return make_model(drift=[[1.0], [-1.0]], sigma=[[[0.3]], [[0.3]]], intensities={(1, 2): 1.0, (2, 1): 1.0})


def test_step_count_covers_the_micro_horizon():
    config = SimConfig(epsilon=0.1, horizon=1.0, h_micro=0.01)

    assert config.micro_horizon == pytest.approx(100.0)
    assert config.n_steps == 10_000
    assert SimConfig(horizon=0.0).n_steps == 0


def test_config_validation():
    assert SimConfig().validate() == (True, None)
    assert SimConfig(epsilon=0.0).validate()[0] is False
    assert SimConfig(epsilon=1.5).validate()[0] is False
    assert SimConfig(alpha0=3).validate(n_modes=2)[0] is False


def test_coarse_step_is_refused_with_a_suggestion():
    config = SimConfig(h_micro=0.05)

    ok, message = config.validate(max_total_rate=4.0)
    assert not ok
    assert "h_micro" in message
    with pytest.raises(SimulationConfigError) as excinfo:
        config.require_valid(max_total_rate=4.0)
    assert excinfo.value.suggested_step == pytest.approx(0.025)


def test_switch_intervals_follow_mode_order():
    model = make_model(
        drift=[[0.0], [0.0], [0.0]],
        sigma=[[[1.0]], [[1.0]], [[1.0]]],
        intensities={(2, 1): 1.0, (2, 3): 2.0},
    )

    assert sample_switch(model, [0.0], 2, 0.1, 0.05) == 1
    assert sample_switch(model, [0.0], 2, 0.1, 0.15) == 3
    assert sample_switch(model, [0.0], 2, 0.1, 0.35) == 2


def test_paths_do_not_depend_on_chunking_or_threads():
    config = SimConfig(epsilon=1.0, horizon=5.0, h_micro=0.01, n_paths=6, seed=42)
    model = _telegraph()

    single = simulate_paths(model, replace(config, chunk_size=1), threads=1)
    batched = simulate_paths(model, replace(config, chunk_size=4), threads=3)

    for a, b in zip(single, batched):
        assert a.path_id == b.path_id
        np.testing.assert_array_equal(a.modes, b.modes)
        np.testing.assert_allclose(a.X, b.X, rtol=0, atol=1e-13)


def test_subset_of_paths_reproduces_full_run():
    config = SimConfig(epsilon=1.0, horizon=2.0, h_micro=0.01, n_paths=5, seed=7)
    model = _telegraph()

    full = simulate_paths(model, config)
    only = simulate_paths(model, config, path_ids=[3])[0]

    np.testing.assert_allclose(only.X, full[3].X, rtol=0, atol=1e-13)
    assert not np.allclose(full[0].X, full[1].X)


def test_path_streams_are_keyed_by_seed_and_path():
    first = path_rng(1, 0).random(4)

    np.testing.assert_array_equal(first, path_rng(1, 0).random(4))
    assert not np.array_equal(first, path_rng(1, 1).random(4))
    assert not np.array_equal(first, path_rng(2, 0).random(4))


def test_recording_stride_keeps_the_final_step():
    config = SimConfig(epsilon=1.0, horizon=0.1, h_micro=0.01, n_paths=1, record_stride=3)

    path = simulate_micro_path(_telegraph(), config, 0)

    np.testing.assert_allclose(path.times, [0.0, 0.03, 0.06, 0.09, 0.1])
    assert path.modes[0] == 1
    assert set(np.unique(path.modes)) <= {1, 2}


def test_brownian_increments_have_unit_variance():
    model = make_model(drift=[[0.0]], sigma=[[[1.0]]])
    config = SimConfig(epsilon=1.0, horizon=1.0, h_micro=0.01, n_paths=2000, seed=3)

    finals = np.array([p.X[-1, 0] for p in simulate_paths(model, config)])

    assert finals.var() == pytest.approx(1.0, rel=0.1)
    assert abs(finals.mean()) < 0.1


def test_rescaling_to_macro_time():
    path = PathSample(
        path_id=0,
        seed=0,
        times=np.array([0.0, 50.0, 100.0]),
        X=np.array([[0.0], [2.0], [4.0]]),
        modes=np.array([1, 2, 2]),
        h_micro=50.0,
    )

    macro = rescale_path(path, 0.1, horizon=1.0)

    np.testing.assert_allclose(macro.times, [0.0, 0.5, 1.0])
    np.testing.assert_allclose(macro.X[:, 0], [0.0, 0.2, 0.4])
    np.testing.assert_array_equal(macro.modes, [1, 2, 2])
    assert macro.scale == "macro"
    with pytest.raises(HorizonError):
        rescale_path(path, 0.05, horizon=1.0)
    with pytest.raises(HorizonError):
        rescale_path(macro, 0.1)


def test_blow_up_is_reported_with_its_step():
    model = make_model(drift=[[1e308]], sigma=[[[1.0]]])
    config = SimConfig(epsilon=1.0, horizon=10.0, h_micro=10.0, n_paths=1)

    with np.errstate(over="ignore"):
        with pytest.raises(SimulationError) as excinfo:
            simulate_paths(model, config)

    assert excinfo.value.step == 1


@pytest.mark.parametrize(
    "intensities, u, expected",
    [
        ({(1, 2): 1.0}, 0.5, 1),
        ({(1, 2): 1.0}, 0.005, 2),
        ({(1, 2): 1.0, (1, 3): 2.0}, 0.015, 3),
    ],
)
def test_switch_draw_examples(intensities, u, expected):
    n_modes = max(beta for _, beta in intensities)
    model = make_model(drift=[[0.0]] * n_modes, sigma=[[[1.0]]] * n_modes, intensities=intensities)

    assert sample_switch(model, [0.0], 1, 0.01, u) == expected


def test_one_step_switch_frequency_matches_the_rate():
    model = make_model(
        drift=[[0.0], [0.0]],
        sigma=[[[1.0]], [[1.0]]],
        intensities={(1, 2): FieldSpec(constant=1.5, terms=(FourierTerm(k=(1,), sin=0.5),)), (2, 1): 1.0},
    )
    h = 0.01
    draws = np.random.default_rng(12).random(1_000_000)

    targets = sample_switch(model, [0.3], 1, h, draws)

    p = model.rates_at([0.3])[0, 0, 1] * h
    frequency = np.mean(targets == 2)
    assert set(np.unique(targets)) <= {1, 2}
    assert abs(frequency - p) <= 4 * np.sqrt(p * (1 - p) / draws.size)


def test_zero_intensity_never_switches():
    model = make_model(drift=[[0.0], [0.0]], sigma=[[[1.0]], [[1.0]]])

    targets = sample_switch(model, [0.7], 1, 0.01, np.random.default_rng(0).random(10_000))

    np.testing.assert_array_equal(targets, 1)


def test_zero_horizon_keeps_only_the_initial_state():
    config = SimConfig(epsilon=0.5, horizon=0.0, h_micro=0.01, n_paths=1, x0=(0.25,))

    path = simulate_micro_path(_telegraph(), config, 0)

    np.testing.assert_array_equal(path.times, [0.0])
    np.testing.assert_array_equal(path.X, [[0.25]])
    np.testing.assert_array_equal(path.modes, [1])
