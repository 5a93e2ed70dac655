"""RunConfig: the single JSON document that fully determines a run."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
import hashlib
import json
from pathlib import Path
from typing import Any, Optional

import numpy as np

from analysis.simulate import SimConfig
from analysis.verify import VerifyConfig
from config.presets import get_preset, preset_document
from models.errors import ConfigError, HomogenizationError
from models.fields import FieldSpec, FourierTerm
from models.homogenize import SolverSettings
from models.switching import SwitchingModel, make_model


DEFAULT_OUTPUT_DIR = "outputs"
_TOP_LEVEL = {"model", "grid", "solver", "sim", "verify", "convergence", "output_dir", "preset", "seed"}


@dataclass(frozen=True)
class GridConfig:
    n: tuple[int, ...]


@dataclass(frozen=True)
class ConvergenceConfig:
    levels: tuple[tuple[int, ...], ...]
    reference_C: Optional[tuple[tuple[float, ...], ...]] = None

    def reference_matrix(self) -> Optional[np.ndarray]:
        return None if self.reference_C is None else np.asarray(self.reference_C, dtype=float)


@dataclass(frozen=True, eq=False)
class RunConfig:
    model: SwitchingModel
    grid: GridConfig
    solver: SolverSettings
    sim: SimConfig
    verify: VerifyConfig
    convergence: ConvergenceConfig
    output_dir: Path
    document: dict = field(default_factory=dict)
    preset: Optional[str] = None

    @property
    def config_hash(self) -> str:
        # the output location does not change results
        return config_hash({key: value for key, value in self.document.items() if key != "output_dir"})

    @property
    def seed(self) -> int:
        return self.sim.seed


def config_hash(document: dict) -> str:
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _fail(path: str, message: str) -> ConfigError:
    return ConfigError(path, message)


def _mapping(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise _fail(path, "expected an object")
    return value


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise _fail(path, "expected an array")
    return value


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    if not np.isfinite(value):
        raise _fail(path, "must be finite")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {value!r}")
    return int(value)


def _check_keys(section: dict, allowed: set, path: str) -> None:
    for key in section:
        if key not in allowed:
            raise _fail(f"{path}.{key}" if path else key, "unknown field")


def parse_field(value: Any, path: str) -> FieldSpec:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return FieldSpec.constant_field(_number(value, path))
    section = _mapping(value, path)
    _check_keys(section, {"constant", "terms"}, path)
    terms = []
    for i, term in enumerate(_list(section.get("terms", []), f"{path}.terms")):
        term_path = f"{path}.terms[{i}]"
        term = _mapping(term, term_path)
        _check_keys(term, {"k", "cos", "sin"}, term_path)
        k = tuple(_integer(v, f"{term_path}.k[{j}]") for j, v in enumerate(_list(term.get("k"), f"{term_path}.k")))
        terms.append(
            FourierTerm(k=k, cos=_number(term.get("cos", 0.0), f"{term_path}.cos"), sin=_number(term.get("sin", 0.0), f"{term_path}.sin"))
        )
    try:
        return FieldSpec(constant=_number(section.get("constant", 0.0), f"{path}.constant"), terms=tuple(terms))
    except HomogenizationError as exc:
        raise _fail(f"{path}.terms", str(exc)) from exc


def parse_model(document: Any, path: str = "model") -> SwitchingModel:
    section = _mapping(document, path)
    _check_keys(section, {"d", "r", "modes", "intensities", "name"}, path)
    d = _integer(section.get("d"), f"{path}.d")
    r = _integer(section.get("r"), f"{path}.r")
    modes = _list(section.get("modes"), f"{path}.modes")
    if not modes:
        raise _fail(f"{path}.modes", "at least one mode is required")

    drift, sigma = [], []
    for alpha, mode in enumerate(modes):
        mode_path = f"{path}.modes[{alpha}]"
        mode = _mapping(mode, mode_path)
        _check_keys(mode, {"drift", "sigma"}, mode_path)
        drift_row = _list(mode.get("drift"), f"{mode_path}.drift")
        if len(drift_row) != d:
            raise _fail(f"{mode_path}.drift", f"expected {d} component(s), got {len(drift_row)}")
        drift.append([parse_field(v, f"{mode_path}.drift[{j}]") for j, v in enumerate(drift_row)])

        sigma_rows = _list(mode.get("sigma"), f"{mode_path}.sigma")
        if len(sigma_rows) != d:
            raise _fail(f"{mode_path}.sigma", f"expected {d} row(s), got {len(sigma_rows)}")
        rows = []
        for i, row in enumerate(sigma_rows):
            row = _list(row, f"{mode_path}.sigma[{i}]")
            if len(row) != r:
                raise _fail(f"{mode_path}.sigma[{i}]", f"expected {r} column(s), got {len(row)}")
            rows.append([parse_field(v, f"{mode_path}.sigma[{i}][{j}]") for j, v in enumerate(row)])
        sigma.append(rows)

    intensities: dict[tuple[int, int], FieldSpec] = {}
    for i, entry in enumerate(_list(section.get("intensities", []), f"{path}.intensities")):
        entry_path = f"{path}.intensities[{i}]"
        entry = _mapping(entry, entry_path)
        _check_keys(entry, {"from", "to", "field"}, entry_path)
        alpha = _integer(entry.get("from"), f"{entry_path}.from")
        beta = _integer(entry.get("to"), f"{entry_path}.to")
        if alpha == beta or not (1 <= alpha <= len(modes) and 1 <= beta <= len(modes)):
            raise _fail(entry_path, f"({alpha}, {beta}) is not an off-diagonal pair of {len(modes)} mode(s)")
        if (alpha, beta) in intensities:
            raise _fail(entry_path, f"duplicate intensity ({alpha}, {beta})")
        intensities[(alpha, beta)] = parse_field(entry.get("field"), f"{entry_path}.field")

    try:
        return make_model(drift, sigma, intensities, name=str(section.get("name", "")))
    except HomogenizationError as exc:
        raise _fail(path, str(exc)) from exc


def _counts(value: Any, path: str, d: int) -> tuple[int, ...]:
    if isinstance(value, int) and not isinstance(value, bool):
        return (value,) * d
    counts = tuple(_integer(v, f"{path}[{j}]") for j, v in enumerate(_list(value, path)))
    if len(counts) != d:
        raise _fail(path, f"expected {d} node count(s), got {len(counts)}")
    return counts


def _parse_grid(document: Any, d: int) -> GridConfig:
    section = _mapping(document, "grid")
    _check_keys(section, {"n"}, "grid")
    n = _counts(section.get("n"), "grid.n", d)
    if any(n_j < 4 for n_j in n):
        raise _fail("grid.n", "every axis needs at least 4 nodes")
    return GridConfig(n=n)


def _parse_solver(document: Any) -> SolverSettings:
    section = _mapping(document, "solver")
    _check_keys(section, {"density_tol", "cell_tol", "centering_tol", "linear_solver"}, "solver")
    defaults = SolverSettings()
    settings = SolverSettings(
        density_tol=_number(section.get("density_tol", defaults.density_tol), "solver.density_tol"),
        cell_tol=_number(section.get("cell_tol", defaults.cell_tol), "solver.cell_tol"),
        centering_tol=_number(section.get("centering_tol", defaults.centering_tol), "solver.centering_tol"),
        linear_solver=str(section.get("linear_solver", defaults.linear_solver)),
    )
    ok, message = settings.validate()
    if not ok:
        raise _fail("solver", message or "invalid")
    return settings


def _parse_sim(document: Any, model: SwitchingModel) -> SimConfig:
    section = _mapping(document, "sim")
    _check_keys(section, set(SimConfig().as_dict()), "sim")
    defaults = SimConfig()
    x0 = section.get("x0")
    if x0 is not None:
        values = _list(x0, "sim.x0")
        if len(values) != model.d:
            raise _fail("sim.x0", f"expected {model.d} coordinate(s)")
        x0 = tuple(_number(v, f"sim.x0[{j}]") for j, v in enumerate(values))
    config = SimConfig(
        epsilon=_number(section.get("epsilon", defaults.epsilon), "sim.epsilon"),
        horizon=_number(section.get("horizon", defaults.horizon), "sim.horizon"),
        h_micro=_number(section.get("h_micro", defaults.h_micro), "sim.h_micro"),
        n_paths=_integer(section.get("n_paths", defaults.n_paths), "sim.n_paths"),
        seed=_integer(section.get("seed", defaults.seed), "sim.seed"),
        x0=x0,
        alpha0=_integer(section.get("alpha0", defaults.alpha0), "sim.alpha0"),
        record_stride=_integer(section.get("record_stride", defaults.record_stride), "sim.record_stride"),
        write_paths=bool(section.get("write_paths", defaults.write_paths)),
        chunk_size=_integer(section.get("chunk_size", defaults.chunk_size), "sim.chunk_size"),
    )
    ok, message = config.validate(n_modes=model.n_modes)
    if not ok:
        raise _fail("sim", message or "invalid")
    return config


def _parse_verify(document: Any) -> VerifyConfig:
    section = _mapping(document, "verify")
    defaults = VerifyConfig()
    _check_keys(section, set(defaults.as_dict()), "verify")
    values: dict[str, Any] = {}
    for key, default in defaults.as_dict().items():
        if key not in section:
            continue
        raw = section[key]
        key_path = f"verify.{key}"
        if key == "tests":
            values[key] = tuple(str(v) for v in _list(raw, key_path))
        elif key == "ergodic_epsilons":
            values[key] = tuple(_number(v, f"{key_path}[{j}]") for j, v in enumerate(_list(raw, key_path)))
        elif key == "ergodic_observable":
            values[key] = str(raw)
        elif isinstance(default, int):
            values[key] = _integer(raw, key_path)
        else:
            values[key] = _number(raw, key_path)
    config = VerifyConfig(**values)
    ok, message = config.validate()
    if not ok:
        raise _fail("verify", message or "invalid")
    return config


def _parse_convergence(document: Any, d: int, fallback_levels: tuple[int, ...], reference: Optional[list]) -> ConvergenceConfig:
    section = _mapping(document, "convergence")
    _check_keys(section, {"levels", "reference_C"}, "convergence")
    raw_levels = _list(section.get("levels", [list(fallback_levels)]), "convergence.levels")
    levels = tuple(_counts(level, f"convergence.levels[{i}]", d) for i, level in enumerate(raw_levels))
    if not levels:
        raise _fail("convergence.levels", "at least one level is required")
    raw_reference = section.get("reference_C", reference)
    reference_C = None
    if raw_reference is not None:
        rows = _list(raw_reference, "convergence.reference_C")
        reference_C = tuple(
            tuple(_number(v, f"convergence.reference_C[{i}][{j}]") for j, v in enumerate(_list(row, f"convergence.reference_C[{i}]")))
            for i, row in enumerate(rows)
        )
        if len(reference_C) != d or any(len(row) != d for row in reference_C):
            raise _fail("convergence.reference_C", f"expected a {d}x{d} matrix")
    return ConvergenceConfig(levels=levels, reference_C=reference_C)


def parse_run_config(document: Any, seed: Optional[int] = None, output_dir: Optional[str] = None) -> RunConfig:
    """Build a RunConfig; every failure names the dotted path of the offending field."""

    document = copy.deepcopy(_mapping(document, "<document>"))
    _check_keys(document, _TOP_LEVEL, "")
    if seed is not None:
        document.setdefault("sim", {})["seed"] = int(seed)
    if output_dir is not None:
        document["output_dir"] = str(output_dir)
    if "seed" in document:
        document.setdefault("sim", {})["seed"] = _integer(document.pop("seed"), "seed")

    if "model" not in document:
        raise _fail("model", "missing section")
    if "grid" not in document:
        raise _fail("grid", "missing section")
    model = parse_model(document["model"])
    grid = _parse_grid(document["grid"], model.d)

    preset_name = document.get("preset")
    reference = None
    if preset_name is not None:
        try:
            reference = get_preset(str(preset_name)).reference.get("C")
        except KeyError as exc:
            raise _fail("preset", str(exc)) from exc

    return RunConfig(
        model=model,
        grid=grid,
        solver=_parse_solver(document.get("solver", {})),
        sim=_parse_sim(document.get("sim", {}), model),
        verify=_parse_verify(document.get("verify", {})),
        convergence=_parse_convergence(document.get("convergence", {}), model.d, grid.n, reference),
        output_dir=Path(str(document.get("output_dir", DEFAULT_OUTPUT_DIR))),
        document=document,
        preset=None if preset_name is None else str(preset_name),
    )


def load_document(config_path: Path) -> dict:
    try:
        text = Path(config_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<config>", f"cannot read {config_path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_run_config(
    config_path: Optional[Path] = None,
    preset: Optional[str] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> RunConfig:
    if (config_path is None) == (preset is None):
        raise ConfigError("<arguments>", "exactly one of --config and --preset is required")
    if preset is not None:
        try:
            document = preset_document(preset)
        except KeyError as exc:
            raise ConfigError("preset", str(exc)) from exc
    else:
        document = load_document(config_path)
    return parse_run_config(document, seed=seed, output_dir=output_dir)
