"""Command-line frontend: validate -> homogenize -> simulate -> verify, plus grid refinement.

Exit codes: 0 success, 1 scientific-check failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from analysis.convergence import refinement_study
from analysis.simulate import simulate_paths, rescale_path
from analysis.verify import VERIFY_TESTS, final_state, run_verification, summarize_ensemble
from config.presets import get_preset_options
from config.run_config import RunConfig, load_run_config
from data.export import (
    grid_function_frame,
    grid_function_from_frame,
    paths_frame,
    read_csv,
    write_csv,
    write_json,
    write_operator_coo,
)
from models.errors import ConfigError, HomogenizationError, HorizonError, SimulationConfigError
from models.grid import TorusGrid, build_grid
from models.homogenize import (
    HomogenizationResult,
    effective_drift,
    homogenize,
    restore_homogenization,
    solve_invariant_density,
)
from models.operators import assemble_generator
from models.validation import ValidationReport, validate_model
from utils.logger import get_logger, read_recent_logs
from utils.paths import output_path


EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

COMMANDS = ("validate", "homogenize", "simulate", "verify", "convergence")

logger = get_logger("switching_homogenization.cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="app.py",
        description="Homogenized drift and covariance of periodic switching diffusions, with Monte Carlo verification.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Pipeline stage to run")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", type=Path, help="RunConfig JSON document")
    source.add_argument("--preset", choices=get_preset_options(), help="Built-in configuration")
    parser.add_argument("--out", help="Output directory (overrides output_dir)")
    parser.add_argument("--seed", type=int, help="Root seed (overrides sim.seed)")
    parser.add_argument("--threads", type=int, help="Worker thread cap (default: available cores)")
    parser.add_argument("--tests", help=f"Comma-separated verify selection from {','.join(VERIFY_TESTS)}")
    parser.add_argument("--from-artifacts", action="store_true", help="verify: reuse density.csv/corrector.csv in --out")
    parser.add_argument("--export-operator", action="store_true", help="homogenize: also write operator.coo")
    parser.add_argument("--debug-uncentered-rhs", action="store_true", help="homogenize: shift the cell rhs off center")
    parser.add_argument("--debug-scale-c", type=float, default=1.0, help="verify: scale the target C (negative control)")
    parser.add_argument("--show-log", action="store_true", help="Print the tail of the log file and exit")
    return parser


def _validation(run: RunConfig, grid: TorusGrid) -> ValidationReport:
    report = validate_model(run.model, grid)
    write_json(output_path(run.output_dir, "validation.json"), report.as_dict(), run.config_hash, run.seed)
    return report


def _require_accepted(run: RunConfig, grid: TorusGrid) -> Optional[ValidationReport]:
    report = _validation(run, grid)
    if not report.accepted:
        print(f"Model rejected: {len(report.violations)} assumption violation(s); see validation.json")
        return None
    return report


def cmd_validate(run: RunConfig, args: argparse.Namespace) -> int:
    report = _validation(run, build_grid(run.model.d, run.grid.n))
    print(
        f"accepted={report.accepted} ellipticity_min={report.ellipticity_min:.6g} "
        f"intensity_min={report.intensity_min:.6g} irreducible={report.irreducible_everywhere} "
        f"max_total_rate={report.max_total_rate:.6g}"
    )
    for violation in report.violations[:10]:
        print(f"  {violation.kind} at node {violation.node} modes {list(violation.modes)} value {violation.value:.6g}")
    return EXIT_OK if report.accepted else EXIT_FAILED


def cmd_homogenize(run: RunConfig, args: argparse.Namespace) -> int:
    grid = build_grid(run.model.d, run.grid.n)
    if _require_accepted(run, grid) is None:
        return EXIT_FAILED

    offset = 1.0 if args.debug_uncentered_rhs else 0.0
    result = homogenize(run.model, grid, run.solver, uncentered_offset=offset)
    payload = result.coefficients.as_dict()
    payload["tolerances"] = run.solver.as_dict()
    payload["operator_warnings"] = list(result.operator.warnings)
    write_json(output_path(run.output_dir, "effective.json"), payload, run.config_hash, run.seed)
    write_csv(
        output_path(run.output_dir, "density.csv"),
        grid_function_frame(grid, {"density": result.density.m}),
        run.config_hash,
        run.seed,
    )
    write_csv(
        output_path(run.output_dir, "corrector.csv"),
        grid_function_frame(grid, {f"phi_{k + 1}": phi for k, phi in enumerate(result.corrector.phi)}),
        run.config_hash,
        run.seed,
    )
    if args.export_operator:
        write_operator_coo(output_path(run.output_dir, "operator.coo"), result.operator.to_coo_frame(), run.config_hash, run.seed)

    print(f"b_bar={result.b_bar.tolist()} C={result.coefficients.C.tolist()}")
    print(f"diffusive_part={result.coefficients.diffusive_part.tolist()} switching_part={result.coefficients.switching_part.tolist()}")
    return EXIT_OK


def cmd_simulate(run: RunConfig, args: argparse.Namespace) -> int:
    grid = build_grid(run.model.d, run.grid.n)
    report = _require_accepted(run, grid)
    if report is None:
        return EXIT_FAILED
    run.sim.require_valid(report.max_total_rate, run.model.n_modes)

    op = assemble_generator(run.model, grid)
    b_bar = effective_drift(run.model, grid, solve_invariant_density(op, grid, run.solver.density_tol, run.solver.linear_solver))
    eps, horizon = run.sim.epsilon, run.sim.horizon

    def reduce(path):
        macro = rescale_path(path, eps, horizon)
        return macro if run.sim.write_paths else final_state(macro)

    paths = simulate_paths(run.model, run.sim, per_path=reduce, threads=args.threads)
    summary = summarize_ensemble(paths, b_bar, eps, horizon)
    payload = {"summary": summary.as_dict(), "b_bar": b_bar.tolist(), "sim": run.sim.as_dict()}
    write_json(output_path(run.output_dir, "simulate.json"), payload, run.config_hash, run.seed)
    if run.sim.write_paths:
        write_csv(output_path(run.output_dir, "paths.csv"), paths_frame(paths), run.config_hash, run.seed)

    print(f"n_paths={summary.n_paths} mean_Y={summary.mean.tolist()} covariance={summary.covariance.tolist()}")
    return EXIT_OK


def _load_artifacts(run: RunConfig, grid: TorusGrid) -> HomogenizationResult:
    frames = {}
    for name in ("density.csv", "corrector.csv"):
        path = Path(run.output_dir) / name
        if not path.exists():
            raise ConfigError("--from-artifacts", f"missing {path}; run homogenize first")
        frame, config_hash, _ = read_csv(path)
        if config_hash != run.config_hash:
            raise ConfigError("--from-artifacts", f"{path} was written by config {config_hash}, not {run.config_hash}")
        frames[name] = frame
    density = grid_function_from_frame(frames["density.csv"], "density")
    phi = [grid_function_from_frame(frames["corrector.csv"], f"phi_{k + 1}").values for k in range(run.model.d)]
    return restore_homogenization(run.model, grid, density.values, phi, run.solver)


def cmd_verify(run: RunConfig, args: argparse.Namespace) -> int:
    grid = build_grid(run.model.d, run.grid.n)
    if _require_accepted(run, grid) is None:
        return EXIT_FAILED

    config = run.verify
    if args.tests:
        config = replace(config, tests=tuple(name.strip() for name in args.tests.split(",") if name.strip()))
        ok, message = config.validate()
        if not ok:
            raise ConfigError("--tests", message or "invalid selection")

    result = _load_artifacts(run, grid) if args.from_artifacts else homogenize(run.model, grid, run.solver)
    report = run_verification(result, run.model, grid, config, run.sim, threads=args.threads, c_scale=args.debug_scale_c)
    payload = report.as_dict()
    payload["config"] = run.document
    write_json(output_path(run.output_dir, "verify.json"), payload, run.config_hash, run.seed)

    for outcome in report.outcomes:
        print(f"{'PASS' if outcome.passed else 'FAIL'} {outcome.name}: value={outcome.value:.6g} threshold={outcome.threshold:.6g}")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_convergence(run: RunConfig, args: argparse.Namespace) -> int:
    frame = refinement_study(run.model, run.convergence.levels, run.solver, run.convergence.reference_matrix())
    write_csv(output_path(run.output_dir, "convergence.csv"), frame, run.config_hash, run.seed)
    print(frame.to_string(index=False))
    return EXIT_OK


HANDLERS = {
    "validate": cmd_validate,
    "homogenize": cmd_homogenize,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "convergence": cmd_convergence,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    if args.show_log:
        print(read_recent_logs())
        return EXIT_OK
    if args.command is None:
        parser.print_usage()
        return EXIT_USAGE

    try:
        run = load_run_config(args.config, args.preset, seed=args.seed, output_dir=args.out)
        logger.info("Running %s (config %s, seed %d)", args.command, run.config_hash, run.seed)
        return HANDLERS[args.command](run, args)
    except SimulationConfigError as exc:
        logger.error("%s", exc)
        hint = f" (suggested h_micro <= {exc.suggested_step:.3g})" if exc.suggested_step else ""
        print(f"error: {exc}{hint}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, HorizonError, ValueError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HomogenizationError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
