"""
Command-line front end.

Exit codes: 0 success (warnings included), 2 hypothesis, contract or
invariant violation, 3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from dotenv import load_dotenv

from .config import RunConfig, apply_environment, parse_config
from .diagnostics import OracleParams, analytic_oracle
from .enums import ExportFormat, OracleName, StudyMode, SuccessStatus, ViolationKind, WaveProfile
from .exceptions import SolverFailure, ValidationError
from .export import write_surface
from .initial_data import TWO_PI, WAVE_MAP_HYPOTHESES, orthogonalize, validate
from .pipeline import run, study

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("config", type=Path, help="YAML run configuration")
    parent.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config value (repeatable; value parsed as YAML)",
    )
    parent.add_argument("--resolution", type=int, help="number of nodes N")
    parent.add_argument("--target-time", type=float, help="target slice y0 = T")
    parent.add_argument("--output-dir", help="directory for all artifacts")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="worldsheet",
        description="Closed-string worldsheets as Lorentzian wave maps, solved on a characteristic lattice.",
    )
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="root logger level",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)
    parent = _config_parent()

    p_run = verbs.add_parser("run", parents=[parent], help="solve to the target slice and export")
    p_run.add_argument("--backward", action="store_true", help="solve towards negative time")

    p_study = verbs.add_parser("study", parents=[parent], help="convergence, stability or backward study")
    p_study.add_argument("--mode", choices=[str(m) for m in StudyMode], help="study mode")
    p_study.add_argument("--levels", type=int, help="refinement levels for convergence studies")

    verbs.add_parser("validate-only", parents=[parent], help="check the initial data and stop")

    p_oracle = verbs.add_parser("oracle", help="dump a closed-form solution on the lattice")
    p_oracle.add_argument("name", choices=[str(o) for o in OracleName])
    p_oracle.add_argument("output", type=Path, help="surface file (.csv or .json)")
    p_oracle.add_argument("--resolution", type=int, default=128)
    p_oracle.add_argument("--rows", type=int, default=None, help="rows to sample (default: up to --target-time)")
    p_oracle.add_argument("--target-time", type=float, default=1.0)
    p_oracle.add_argument("--dimension", type=int, default=3)
    p_oracle.add_argument("--radius", type=float, default=1.0)
    p_oracle.add_argument("--beta", type=float, default=0.0)
    p_oracle.add_argument("--amplitude", type=float, default=0.5)
    p_oracle.add_argument("--profile", choices=[str(p) for p in WaveProfile], default=str(WaveProfile.CIRCLE))
    return parser


def _overrides(args: argparse.Namespace) -> list[str]:
    overrides = list(args.overrides)
    if args.resolution is not None:
        overrides.append(f"resolution={args.resolution}")
    if args.target_time is not None:
        overrides.append(f"target_time={args.target_time!r}")
    if args.output_dir is not None:
        overrides.append(f"output.directory={args.output_dir}")
    if getattr(args, "backward", False):
        overrides.append("backward=true")
    if getattr(args, "mode", None) is not None:
        overrides.append(f"study.mode={args.mode}")
    if getattr(args, "levels", None) is not None:
        overrides.append(f"study.levels={args.levels}")
    return overrides


def load_config(args: argparse.Namespace) -> RunConfig:
    config = parse_config(args.config, _overrides(args))
    # an explicit --output-dir beats the environment
    return config if args.output_dir is not None else apply_environment(config)


def _validate_only(config: RunConfig) -> int:
    metric = config.build_metric()
    curve = config.build_curve()
    if config.curve.project_k1:
        curve = orthogonalize(metric, curve)
    strict = config.curve.conformalize
    violations = validate(metric, curve, config.tolerances.admissibility, strict=strict)
    blocking = set(ViolationKind) if strict else WAVE_MAP_HYPOTHESES
    for v in violations:
        print(f"{'ERROR' if v.kind in blocking else 'note'}: {v}")
    if any(v.kind in blocking for v in violations):
        return SuccessStatus.INVARIANT_VIOLATION.exit_code
    print("initial data admissible")
    return SuccessStatus.SUCCESS.exit_code


def _oracle(args: argparse.Namespace) -> int:
    params = OracleParams(
        radius=args.radius,
        beta=args.beta,
        profile=args.profile,
        amplitude=args.amplitude,
        dimension=args.dimension,
    )
    h = TWO_PI / args.resolution
    rows = args.rows if args.rows is not None else int(args.target_time / h) + 1
    surface = analytic_oracle(args.name, args.resolution, rows, params)
    write_surface(surface, args.output, ExportFormat.from_path(args.output))
    print(f"wrote {rows}x{args.resolution} {args.name} grid to {args.output}")
    return SuccessStatus.SUCCESS.exit_code


def _dispatch(args: argparse.Namespace) -> int:
    if args.verb == "oracle":
        return _oracle(args)
    config = load_config(args)
    if args.verb == "validate-only":
        return _validate_only(config)
    report = run(config) if args.verb == "run" else study(config)
    print(f"status={report.status} exit={report.exit_code} output={config.output.directory}")
    return report.exit_code


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT)
    try:
        return _dispatch(args)
    except ValidationError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return SuccessStatus.INVARIANT_VIOLATION.exit_code
    except SolverFailure as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return SuccessStatus.SOLVER_FAILURE.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
