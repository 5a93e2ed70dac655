import json

import pytest

import app
from config.presets import preset_document
from data.export import read_csv, read_json


def _write_config(tmp_path, **sim):
    document = preset_document("telegraph")
    del document["preset"]
    document["sim"].update(sim)
    path = tmp_path / "telegraph.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_validate_writes_report(tmp_path):
    code = app.main(["validate", "--preset", "telegraph", "--out", str(tmp_path)])

    report = read_json(tmp_path / "validation.json")
    assert code == app.EXIT_OK
    assert report["accepted"] is True
    assert len(report["config_hash"]) == 16
    assert report["seed"] == 2024


def test_homogenize_writes_coefficients_and_fields(tmp_path):
    code = app.main(["homogenize", "--preset", "telegraph", "--out", str(tmp_path), "--export-operator"])

    effective = read_json(tmp_path / "effective.json")
    density, config_hash, _ = read_csv(tmp_path / "density.csv")
    corrector, _, _ = read_csv(tmp_path / "corrector.csv")
    assert code == app.EXIT_OK
    assert effective["C"][0][0] == pytest.approx(1.1, abs=1e-9)
    assert effective["tolerances"]["cell_tol"] == pytest.approx(1e-8)
    assert config_hash == effective["config_hash"]
    assert len(density) == 32
    assert corrector["phi_1"].abs().max() == pytest.approx(0.5, abs=1e-9)
    assert (tmp_path / "operator.coo").exists()


def test_uncentered_debug_flag_fails_the_run(tmp_path, capsys):
    code = app.main(["homogenize", "--preset", "telegraph", "--out", str(tmp_path), "--debug-uncentered-rhs"])

    assert code == app.EXIT_FAILED
    assert "Fredholm compatibility violated" in capsys.readouterr().err
    assert not (tmp_path / "effective.json").exists()


def test_verify_reuses_artifacts(tmp_path):
    config = _write_config(tmp_path, epsilon=0.5, n_paths=200)
    out = tmp_path / "run"
    assert app.main(["homogenize", "--config", str(config), "--out", str(out)]) == app.EXIT_OK

    code = app.main(["verify", "--config", str(config), "--out", str(out), "--from-artifacts", "--tests", "drift"])

    report = read_json(out / "verify.json")
    assert code in (app.EXIT_OK, app.EXIT_FAILED)
    assert report["tests_run"] == ["drift"]
    assert "covariance" not in report
    assert report["config"]["sim"]["n_paths"] == 200


def test_artifacts_from_another_config_are_refused(tmp_path):
    config = _write_config(tmp_path, epsilon=0.5, n_paths=200)
    assert app.main(["homogenize", "--config", str(config), "--out", str(tmp_path)]) == app.EXIT_OK

    code = app.main(
        ["verify", "--config", str(config), "--out", str(tmp_path), "--seed", "5", "--from-artifacts", "--tests", "drift"]
    )

    assert code == app.EXIT_USAGE


def test_missing_artifacts_are_a_usage_error(tmp_path):
    code = app.main(["verify", "--preset", "telegraph", "--out", str(tmp_path), "--from-artifacts", "--tests", "drift"])

    assert code == app.EXIT_USAGE


def test_simulate_writes_summary_and_paths(tmp_path):
    config = _write_config(tmp_path, epsilon=0.5, horizon=0.5, n_paths=20, write_paths=True, record_stride=50)

    code = app.main(["simulate", "--config", str(config), "--out", str(tmp_path), "--threads", "2"])

    summary = read_json(tmp_path / "simulate.json")
    paths, _, _ = read_csv(tmp_path / "paths.csv")
    assert code == app.EXIT_OK
    assert summary["summary"]["n_paths"] == 20
    assert sorted(paths["path_id"].unique()) == list(range(20))
    assert set(paths["I"].unique()) <= {1, 2}


def test_coarse_time_step_is_a_usage_error(tmp_path, capsys):
    config = _write_config(tmp_path, h_micro=0.5)

    code = app.main(["simulate", "--config", str(config), "--out", str(tmp_path)])

    assert code == app.EXIT_USAGE
    assert "suggested h_micro" in capsys.readouterr().err


def test_convergence_writes_table(tmp_path):
    code = app.main(["convergence", "--preset", "constant", "--out", str(tmp_path)])

    frame, _, seed = read_csv(tmp_path / "convergence.csv")
    assert code == app.EXIT_OK
    assert list(frame["n"]) == ["8x8", "16x16", "32x32"]
    assert seed == 7


@pytest.mark.parametrize(
    "argv",
    [
        ["validate"],
        ["validate", "--preset", "telegraph", "--config", "run.json"],
        ["validate", "--preset", "no-such-preset"],
        ["integrate", "--preset", "telegraph"],
        [],
    ],
)
def test_usage_errors(argv):
    assert app.main(argv) == app.EXIT_USAGE


def test_malformed_config_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")

    assert app.main(["validate", "--config", str(path), "--out", str(tmp_path)]) == app.EXIT_USAGE


def test_rejected_model_exits_with_failure(tmp_path):
    document = preset_document("telegraph")
    del document["preset"]
    document["model"]["intensities"][0]["field"] = -1.0
    path = tmp_path / "negative.json"
    path.write_text(json.dumps(document), encoding="utf-8")

    assert app.main(["validate", "--config", str(path), "--out", str(tmp_path)]) == app.EXIT_FAILED
    assert app.main(["homogenize", "--config", str(path), "--out", str(tmp_path)]) == app.EXIT_FAILED
    assert read_json(tmp_path / "validation.json")["accepted"] is False


def test_simulate_is_reproducible(tmp_path):
    config = _write_config(tmp_path, epsilon=0.5, horizon=0.5, n_paths=16)

    assert app.main(["simulate", "--config", str(config), "--out", str(tmp_path / "a"), "--threads", "1"]) == app.EXIT_OK
    assert app.main(["simulate", "--config", str(config), "--out", str(tmp_path / "b"), "--threads", "4"]) == app.EXIT_OK

    first = (tmp_path / "a" / "simulate.json").read_bytes()
    assert first == (tmp_path / "b" / "simulate.json").read_bytes()
