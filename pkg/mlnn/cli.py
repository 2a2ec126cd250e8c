"""
Command-line interface for mlnn

Every command reads an optional run config, writes its outputs (CSV/JSON,
checkpoints, run.log and manifest.json) into one output directory and
returns 0 on success, 2 for usage or configuration problems and 3 when the
computation itself fails.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from . import constants as C
from .models import RunManifest
from .utils.config import ConfigManager, RunConfig, load_run_config
from .utils.exceptions import (
    ConfigurationError,
    FileError,
    MlnnError,
    RunError,
    ValidationError,
    format_error_message,
)
from .utils.io import read_json, write_csv, write_json, write_profile
from .utils.logging import colors_enabled, get_logger, resolve_log_level, setup_logging
from .utils.output_formatter import (
    print_error,
    print_header,
    print_info,
    print_success,
    print_table,
    print_warning,
)
from .utils.validation import (
    ensure_within,
    validate_counts,
    validate_file_path,
    validate_positive,
)

logger = get_logger(__name__)

DEFAULT_OUT = "results"
RESOLVED_CONFIG = "config.json"


class OutputDir:
    """Output directory that refuses paths outside itself and records what it wrote."""

    def __init__(self, root: str):
        self.root = Path(root).resolve()
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: List[str] = []

    def path(self, name: str) -> Path:
        target = ensure_within(self.root, name)
        relative = str(target.relative_to(self.root))
        if relative not in self.files:
            self.files.append(relative)
        return target


class CommandContext:
    """Resolved config, output directory and worker cap of one invocation."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config_path: Optional[str] = args.config
        self.config: RunConfig = load_run_config(args.config, args.seed)
        if args.jobs is not None:
            if args.jobs < 1:
                raise ValidationError(f"--jobs must be at least 1, got {args.jobs}")
            self.config.jobs = args.jobs
        self.out = OutputDir(args.out)
        level = resolve_log_level(args.log_level, self.config.logging.level)
        log_file = self.config.logging.log_file or C.LOG_FILE
        setup_logging(
            level,
            str(self.out.path(log_file)),
            enable_colors=colors_enabled(),
        )

    @property
    def jobs(self) -> int:
        return self.config.jobs

    def write_manifest(self, arguments: Optional[Dict[str, Any]] = None) -> None:
        manifest_path = self.out.path(C.MANIFEST_FILE)
        manifest = RunManifest(
            command=self.args.command,
            config_path=self.config_path,
            seed=self.config.seed,
            output_dir=str(self.out.root),
            config_hash=self.config.content_hash(),
            arguments=arguments or {},
            files=list(self.out.files),
        )
        write_json(manifest_path, manifest.to_dict())


def _problem(ctx: CommandContext, args: argparse.Namespace):
    from .solvers.problems import SolverProblem

    if getattr(args, "problem", None):
        ctx.config.problem.kind = args.problem
    ctx.config.validate()
    return SolverProblem.from_config(ctx.config.problem)


def _z(problem, values: Optional[Sequence[float]]) -> np.ndarray:
    if not values:
        return problem.bounds.mean(axis=1)
    z = np.asarray(values, dtype=np.float64)
    if z.size != problem.dimension:
        raise ValidationError(f"--z needs {problem.dimension} values, got {z.size}")
    return z


def _fail_run(ctx: CommandContext, error: RunError) -> int:
    write_json(ctx.out.path(C.REPORT_FILE), error.partial_report)
    ctx.write_manifest({"status": "failed"})
    print_error(format_error_message(error))
    return C.EXIT_RUNTIME


def cmd_run_mlnn(ctx: CommandContext) -> int:
    """Build an MLNN surrogate; write report, errors, checkpoints and samples."""
    from .multilevel.evaluation import write_errors_csv
    from .multilevel.pipeline import STOP_MAX_LEVELS, run_mlnn, save_level

    ctx.config.save(ctx.out.path(RESOLVED_CONFIG))
    try:
        run = run_mlnn(
            ctx.config,
            ctx.jobs,
            on_level=lambda outcome: _save_level(ctx, outcome, save_level),
        )
    except RunError as e:
        return _fail_run(ctx, e)
    write_json(ctx.out.path(C.REPORT_FILE), run.report)
    write_errors_csv(
        ctx.out.path(C.ERRORS_FILE),
        run.holdout,
        run.surrogate.problem.dimension,
        run.surrogate.n_levels,
    )
    ctx.write_manifest()
    if run.stop_reason == STOP_MAX_LEVELS:
        print_warning(
            f"Stopped at max_levels={ctx.config.multilevel.max_levels} with corrections "
            f"still above epsilon_acc={ctx.config.multilevel.epsilon_acc:g}"
        )
    print_table(
        ["level", "samples", "v_min", "accuracy"],
        [
            [e["level"], e["samples"], f"{e.get('v_min', 0.0):.3e}", f"{e['accuracy']:.3e}"]
            for e in run.report["levels"]
        ],
    )
    print_success(
        f"MLNN surrogate with {run.surrogate.n_levels} levels written to {ctx.out.root}"
    )
    return C.EXIT_OK


def _save_level(ctx: CommandContext, outcome, save_level: Callable) -> None:
    ctx.out.path(C.CHECKPOINT_TEMPLATE.format(level=outcome.level))
    ctx.out.path(C.SAMPLES_TEMPLATE.format(level=outcome.level))
    save_level(ctx.out.root, outcome, ctx.config.seed)


def cmd_run_mlsc(ctx: CommandContext) -> int:
    """Build the collocation baseline; write report and errors."""
    from .mlsc.build import run_mlsc
    from .multilevel.evaluation import write_errors_csv

    if ctx.args.levels is not None:
        ctx.config.mlsc.n_levels = ctx.args.levels
    try:
        run = run_mlsc(ctx.config, ctx.jobs)
    except RunError as e:
        return _fail_run(ctx, e)
    write_json(ctx.out.path(C.REPORT_FILE), run.report)
    write_errors_csv(
        ctx.out.path(C.ERRORS_FILE),
        run.holdout,
        run.surrogate.problem.dimension,
        run.surrogate.n_levels,
    )
    ctx.write_manifest()
    print_table(
        ["level", "cc_level", "samples", "accuracy"],
        [
            [e["level"], e["cc_level"], e["samples"], f"{e['accuracy']:.3e}"]
            for e in run.report["levels"]
        ],
    )
    print_success(
        f"MLSC surrogate with {run.surrogate.n_levels} levels written to {ctx.out.root}"
    )
    return C.EXIT_OK


def cmd_compare(ctx: CommandContext) -> int:
    """Merge an MLNN and an MLSC report into comparison.csv."""
    from .mlsc.comparison import compare_reports, write_comparison

    mlnn_report = read_json(validate_file_path(ctx.args.mlnn_report))
    mlsc_report = read_json(validate_file_path(ctx.args.mlsc_report))
    rows = compare_reports(mlnn_report, mlsc_report)
    write_comparison(ctx.out.path(C.COMPARISON_FILE), rows)
    ctx.write_manifest(
        {"mlnn_report": ctx.args.mlnn_report, "mlsc_report": ctx.args.mlsc_report}
    )
    print_success(f"Comparison of {len(rows)} levels written to {ctx.out.root}")
    return C.EXIT_OK


def _grid_list(values: Optional[List[int]], default: Sequence[int], name: str) -> List[int]:
    if values is None:
        return list(default)
    return validate_counts(values, name, minimum=2)


def cmd_convergence(ctx: CommandContext) -> int:
    """Error against the closed form or a fine reference for a list of grids."""
    from .solvers.diagnostics import convergence_study

    problem = _problem(ctx, ctx.args)
    z = _z(problem, ctx.args.z)
    ns = _grid_list(ctx.args.n, (100, 200, 400, 800), "--n")
    study = convergence_study(problem, z, ns)
    write_csv(
        ctx.out.path("convergence.csv"),
        ["n", "error", "order", "work", "message"],
        [[r.n, r.error, r.order, r.work, r.message] for r in study.rows],
    )
    summary = {
        "problem": problem.kind,
        "z": z.tolist(),
        "reference": study.reference,
        "reference_n": study.reference_n,
        "fitted_order": study.fitted_order,
    }
    write_json(ctx.out.path("convergence.json"), summary)
    ctx.write_manifest(summary)
    print_header(f"Convergence of {problem.kind} at z={z.tolist()}")
    print_table(
        ["n", "error", "order"],
        [
            [r.n, f"{r.error:.3e}", "" if r.order is None else f"{r.order:.3f}"]
            for r in study.rows
        ],
    )
    if study.fitted_order is not None:
        print_info(f"Fitted order: {study.fitted_order:.3f}")
    return C.EXIT_OK


def cmd_theorem1(ctx: CommandContext) -> int:
    """Similarity defect between consecutive inter-level errors."""
    from .solvers.diagnostics import theorem1_sweep

    problem = _problem(ctx, ctx.args)
    z = _z(problem, ctx.args.z)
    n1 = ctx.args.n1 or ctx.config.problem.n_coarse
    rows = theorem1_sweep(problem, z, n1, ctx.args.levels)
    write_csv(
        ctx.out.path("theorem1.csv"),
        ["n", "h", "rho", "message"],
        [[r.n, r.h, r.rho, r.error] for r in rows],
    )
    ctx.write_manifest(
        {"problem": problem.kind, "z": z.tolist(), "n1": n1, "levels": ctx.args.levels}
    )
    print_header(f"Level-error similarity of {problem.kind} at z={z.tolist()}")
    print_table(["n", "h", "rho"], [[r.n, f"{r.h:.3e}", f"{r.rho:.3e}"] for r in rows])
    return C.EXIT_OK


def cmd_solve(ctx: CommandContext) -> int:
    """Solve once and export the (x, u) profile."""
    problem = _problem(ctx, ctx.args)
    z = _z(problem, ctx.args.z)
    n = ctx.args.n or ctx.config.problem.n_coarse
    solution = problem.solve(z, n)
    x = np.arange(n + 1) / n
    write_profile(ctx.out.path("profile.csv"), x, solution.values)
    summary = {
        "problem": problem.kind,
        "z": z.tolist(),
        "n": n,
        "iterations": solution.iterations,
        "residual_history": solution.residual_history,
        "continuation_steps": solution.continuation_steps,
        "work": solution.work,
    }
    write_json(ctx.out.path("solve.json"), summary)
    ctx.write_manifest(summary)
    print_success(
        f"Solved {problem.kind} at z={z.tolist()} on N={n} "
        f"({solution.iterations} sweeps, residual {solution.residual:.2e})"
    )
    return C.EXIT_OK


def cmd_extrapolate(ctx: CommandContext) -> int:
    """Errors of a finished MLNN run at points outside its parameter box."""
    from .multilevel.evaluation import write_errors_csv
    from .multilevel.pipeline import extrapolation_points, extrapolation_report, load_surrogate

    config = ctx.config
    resolved = Path(ctx.args.run) / RESOLVED_CONFIG
    if ctx.config_path is None and resolved.exists():
        config = load_run_config(resolved, ctx.args.seed)
    surrogate = load_surrogate(ctx.args.run, config)
    dim = surrogate.problem.dimension
    if ctx.args.z:
        if len(ctx.args.z) % dim:
            raise ValidationError(f"--z needs a multiple of {dim} values, got {len(ctx.args.z)}")
        zs = np.asarray(ctx.args.z, dtype=np.float64).reshape(-1, dim)
    else:
        factors = [validate_positive(f, "--factors") for f in ctx.args.factors]
        zs = extrapolation_points(surrogate.problem.bounds, factors)
    rows = extrapolation_report(surrogate, list(zs), ctx.jobs)
    write_errors_csv(
        ctx.out.path("extrapolation.csv"), rows, surrogate.problem.dimension, surrogate.n_levels
    )
    ctx.write_manifest({"run": ctx.args.run, "z": zs.tolist()})
    print_table(
        ["z", "inside", "rms_error"],
        [[r.z.tolist(), r.inside, f"{r.rms_error:.3e}"] for r in rows],
    )
    return C.EXIT_OK


def cmd_transfer_study(ctx: CommandContext) -> int:
    """Level-3 sample counts with and without transfer learning."""
    from .multilevel.pipeline import transfer_study

    seeds = ctx.args.seeds or [ctx.config.seed, ctx.config.seed + 1, ctx.config.seed + 2]
    if any(seed < 0 for seed in seeds):
        raise ValidationError(f"--seeds must be non-negative, got {seeds}")
    try:
        rows = transfer_study(ctx.config, seeds, ctx.jobs)
    except MlnnError as e:
        print_error(format_error_message(e))
        ctx.write_manifest({"seeds": seeds, "status": "failed"})
        return C.EXIT_RUNTIME
    headers = [
        "seed",
        "transfer_samples",
        "fresh_samples",
        "transfer_rounds",
        "fresh_rounds",
        "transfer_v_min",
        "fresh_v_min",
        "transfer_trainable",
        "fresh_trainable",
    ]
    write_csv(
        ctx.out.path("transfer_study.csv"),
        headers,
        [[getattr(r, h) for h in headers] for r in rows],
    )
    ctx.write_manifest({"seeds": seeds})
    print_table(headers[:3], [[r.seed, r.transfer_samples, r.fresh_samples] for r in rows])
    return C.EXIT_OK


def cmd_init_config(ctx: CommandContext) -> int:
    """Write the default run configuration."""
    name = f"config.{ctx.args.format}"
    path = ConfigManager().create_default_config(ctx.out.path(name))
    ctx.write_manifest({"format": ctx.args.format})
    print_success(f"Default configuration written to {path}")
    return C.EXIT_OK


COMMANDS: Dict[str, Callable[[CommandContext], int]] = {
    "run-mlnn": cmd_run_mlnn,
    "run-mlsc": cmd_run_mlsc,
    "compare": cmd_compare,
    "convergence": cmd_convergence,
    "theorem1": cmd_theorem1,
    "solve": cmd_solve,
    "extrapolate": cmd_extrapolate,
    "transfer-study": cmd_transfer_study,
    "init-config": cmd_init_config,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run config (JSON or YAML)")
    common.add_argument("--out", default=DEFAULT_OUT, help="Output directory")
    common.add_argument("--seed", type=int, help="Override the config seed")
    common.add_argument(
        "--jobs", type=int, help=f"Worker cap (falls back to {C.ENV_JOBS}, then config)"
    )
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        type=str.upper,
        help=f"Log level (falls back to {C.ENV_LOG_LEVEL}, then config)",
    )

    parser = argparse.ArgumentParser(
        prog="mlnn",
        description="Multi-level neural network surrogates for parametric PDEs",
    )
    parser.add_argument("--version", action="version", version=f"mlnn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run-mlnn", parents=[common], help="Build an MLNN surrogate")

    mlsc = sub.add_parser("run-mlsc", parents=[common], help="Build the MLSC baseline")
    mlsc.add_argument("--levels", type=int, help="PDE levels (default: config)")

    compare = sub.add_parser("compare", parents=[common], help="Compare two reports")
    compare.add_argument("mlnn_report")
    compare.add_argument("mlsc_report")

    def problem_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--problem", choices=list(C.PROBLEM_KINDS[:3]), help="Problem kind")
        p.add_argument("--z", type=float, nargs="+", help="Parameter point (default: box centre)")

    convergence = sub.add_parser("convergence", parents=[common], help="Grid convergence study")
    problem_args(convergence)
    convergence.add_argument("--n", type=int, nargs="*", help="Interval counts")

    theorem1 = sub.add_parser(
        "theorem1", parents=[common], help="Similarity of consecutive level errors"
    )
    problem_args(theorem1)
    theorem1.add_argument("--n1", type=int, help="Coarse interval count")
    theorem1.add_argument("--levels", type=int, default=3, help="Hierarchy depth (>= 3)")

    solve = sub.add_parser("solve", parents=[common], help="Solve once, export the profile")
    problem_args(solve)
    solve.add_argument("--n", type=int, help="Interval count")

    extrapolate = sub.add_parser(
        "extrapolate", parents=[common], help="Surrogate errors outside the parameter box"
    )
    extrapolate.add_argument("--run", required=True, help="Output directory of run-mlnn")
    extrapolate.add_argument("--z", type=float, nargs="+", help="Points, flattened")
    extrapolate.add_argument(
        "--factors",
        type=float,
        nargs="+",
        default=[1.1, 1.25, 1.5],
        help="Multiples of the upper bound",
    )

    transfer = sub.add_parser(
        "transfer-study", parents=[common], help="Transfer learning versus fresh networks"
    )
    transfer.add_argument("--seeds", type=int, nargs="+", help="Seeds (default: 3 from --seed)")

    init = sub.add_parser("init-config", parents=[common], help="Write the default config")
    init.add_argument("--format", choices=["json", "yaml"], default="json")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point for the CLI"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        ctx = CommandContext(args)
    except (ConfigurationError, FileError, ValidationError) as e:
        print_error(format_error_message(e))
        return C.EXIT_USAGE

    try:
        return COMMANDS[args.command](ctx)
    except (ConfigurationError, FileError, ValidationError) as e:
        logger.debug("Usage failure", exc_info=True)
        print_error(format_error_message(e))
        return C.EXIT_USAGE
    except MlnnError as e:
        logger.debug("Runtime failure", exc_info=True)
        print_error(format_error_message(e))
        return C.EXIT_RUNTIME
    except KeyboardInterrupt:
        print_error("Interrupted")
        return C.EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
