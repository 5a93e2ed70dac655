import math

import numpy as np
import pytest

from analysis.convergence import refinement_study
from config.run_config import load_run_config


def test_gradient_drift_refinement_reports_second_order():
    run = load_run_config(preset="gradient-drift")

    frame = refinement_study(run.model, [256, 64, 128], reference_C=run.convergence.reference_matrix())

    assert list(frame["n"]) == ["64", "128", "256"]
    assert math.isnan(frame["observed_order"].iloc[0])
    assert frame["observed_order"].iloc[1:].between(1.7, 2.3).all()
    assert frame["error"].is_monotonic_decreasing


def test_two_dimensional_levels_are_labelled_per_axis():
    run = load_run_config(preset="constant")

    frame = refinement_study(run.model, [8, (16, 16)])

    assert list(frame["n"]) == ["8x8", "16x16"]
    assert {"b_bar_1", "b_bar_2", "C_11", "C_12", "C_21", "C_22", "error"} <= set(frame.columns)
    np.testing.assert_allclose(frame["C_11"], 1.25, atol=1e-9)
    assert frame["error"].max() == pytest.approx(0.0, abs=1e-9)
