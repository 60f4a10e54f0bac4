"""
Command-line entry point.

Usage:
    python -m src.cli verify-test1 --mesh-h 0.05
    python -m src.cli verify-test2 --beta 100 --variant var --variant cmn18
    python -m src.cli sweep-beta --workers 4 --out results/beta
    python -m src.cli sweep-gamma --values 6.25e-7 6.25e-5 2e-3
    python -m src.cli disclinations --preset flower
    python -m src.cli custom --config runs/custom.toml
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from .config import get_log_level
from .errors import ConfigError
from .models import ExperimentKind, FormulationVariant
from .orchestrator import EXIT_CONFIG, Supervisor, build_run_config
from .orchestrator.supervisor import ExperimentResult
from .performance import format_performance_report, get_performance_log

logger = logging.getLogger(__name__)


def _disclination(text: str):
    """``x,y,s`` -> ((x, y), s)."""
    try:
        x, y, s = (float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,s, got {text!r}") from None
    return (x, y), s


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fvk-plates",
        description="DG solver for clamped Föppl-von Kármán plates with wedge disclinations",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run file")
    common.add_argument("--mesh-h", type=float, help="target edge length of the generated disc mesh")
    common.add_argument("--mesh", help="Gmsh MSH 2.2 ASCII file (overrides --mesh-h)")
    common.add_argument("--beta", type=float, help="aspect ratio β")
    common.add_argument("--gamma", type=float, help="load scale γ (default: γβ⁴ = 1)")
    common.add_argument("--nu", type=float, help="Poisson ratio ν")
    common.add_argument("--alpha", type=float, help="interior-penalty parameter α")
    common.add_argument("--variant", action="append", choices=[v.value for v in FormulationVariant],
                        help="formulation variant (repeatable)")
    common.add_argument("--load", type=float, help="uniform pressure p")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int, help="worker processes for sweeps")
    common.add_argument("--continuation-steps", type=int, help="continuation steps in γ")
    common.add_argument("--max-iters", type=int, help="Newton iteration limit")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")

    for kind in ExperimentKind:
        cmd = sub.add_parser(kind.value, parents=[common], help=f"run {kind.value}")
        if kind in (ExperimentKind.SWEEP_BETA, ExperimentKind.SWEEP_GAMMA):
            cmd.add_argument("--values", type=float, nargs="+", help="sweep values (increasing)")
        if kind in (ExperimentKind.SWEEP_BETA, ExperimentKind.SWEEP_GAMMA,
                    ExperimentKind.DISCLINATIONS, ExperimentKind.CUSTOM):
            cmd.add_argument("--disclination", type=_disclination, action="append", metavar="X,Y,S",
                             help="disclination at (X, Y) with Frank angle S (repeatable)")
        if kind in (ExperimentKind.DISCLINATIONS, ExperimentKind.CUSTOM):
            cmd.add_argument("--preset", action="append", help="named disclination preset (repeatable)")
        if kind is ExperimentKind.VERIFY_TEST2:
            cmd.add_argument("--y1", type=float, nargs=2, metavar=("X", "Y"), help="position of the +1 disclination")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Command-line values keyed by ``RunConfig``/``SolverConfig`` field names."""
    return {
        "mesh_h": args.mesh_h,
        "mesh_path": args.mesh,
        "beta": args.beta,
        "gamma": args.gamma,
        "nu": args.nu,
        "alpha": args.alpha,
        "variants": args.variant,
        "load": args.load,
        "output_dir": args.out,
        "workers": args.workers,
        "continuation_steps": args.continuation_steps,
        "max_iters": args.max_iters,
        "sweep_values": getattr(args, "values", None),
        "disclinations": getattr(args, "disclination", None),
        "presets": getattr(args, "preset", None),
        "y1": tuple(args.y1) if getattr(args, "y1", None) else None,
    }


def print_summary(result: ExperimentResult) -> None:
    print("\n" + "=" * 60)
    print(f"  {result.kind.value}: {result.status} (exit {result.exit_code})")
    print("=" * 60)
    for name, report in result.reports.items():
        state = f"converged ({report.stop_criterion})" if report.converged else f"FAILED ({report.reason})"
        print(f"  {name:28s} {report.iterations:3d} iterations  |R| = {report.final_residual:.3e}  {state}")
    if result.checks:
        print("\nChecks:")
        for check in result.checks:
            mark = "[PASS]" if check.passed else ("[FAIL]" if check.gate else "[WARN]")
            print(f"  {mark} {check.name}: {check.value} (threshold {check.threshold})")
    print(f"\nOutputs in {result.output_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, get_log_level(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = build_run_config(args.command, args.config, overrides_from_args(args))
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    print("\n" + "=" * 60)
    print(f"  {config.kind.value}")
    print(f"  mesh: {config.mesh_path or f'h = {config.mesh_h}'}  β = {config.beta:g}  ν = {config.nu:g}  α = {config.alpha:g}")
    print(f"  variants: {', '.join(v.value for v in config.variants)}")
    print("=" * 60)

    supervisor = Supervisor(config)
    result = supervisor.run()
    print_summary(result)
    if args.verbose:
        print("\n" + supervisor.monitor.format_dashboard())
        print("\n" + format_performance_report(get_performance_log().data))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
