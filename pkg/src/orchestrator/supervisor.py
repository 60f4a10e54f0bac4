"""
Supervisor - runs the experiments described by a ``RunConfig``.

Every experiment writes its tables and fields under ``config.output_dir``
together with ``manifest.json`` (configuration echo, mesh and system
statistics, solver reports, checks, performance summary, versions).

Exit codes: 0 success, 3 a solve did not converge, 4 a gated check of a
verification run failed. Configuration errors (2) are raised before any
experiment starts.
"""

import logging
import os
import platform
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import meshio
import numpy as np
import scipy

from .. import __version__
from ..analytic import (
    get_preset, kl_bending_energy, kl_membrane_energy, single_disclination, test1_exact, test2_exact,
)
from ..fem import (
    DofMap, Mesh, PlateState, assemble_jacobian, build_dofmap, generate_disc_mesh, import_msh, system_statistics,
)
from ..models import (
    DisclinationSet, EnergyBreakdown, ExperimentKind, FormulationVariant, PlateProblem, Profile,
    RunConfig, SolverConfig, SolverReport, uniform_load,
)
from ..performance import get_performance_log, get_performance_summary
from ..post import (
    compute_energies, energy_errors, extract_profile, gaussian_curvature_field, heat_maps,
    hessian_energy, profile_deviation, self_similarity, write_grid_csv, write_json,
    write_profiles_csv, write_records_csv, write_vtk,
)
from ..solver import continuation_ramp, continuation_solve, newton_solve, solve_kl_bending, solve_kl_membrane
from .monitor import Monitor
from .scheduler import SchedulerConfig, Task, TaskScheduler

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_THRESHOLD = 4

# γ above which the bending response at β = 20 stops being quadratic.
NONLINEAR_GAMMA = 2e-3
ENERGY_TOLERANCE_PERCENT = 1.0
VARIANT_TOLERANCE = 0.01
MEAN_CURVATURE_TOLERANCE = 1e-3
AUTO_CONTINUATION_STEPS = 5


@dataclass
class Check:
    """One acceptance check; only gated checks affect the exit code."""
    name: str
    passed: bool
    value: Any = None
    threshold: Any = None
    gate: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": self.value,
            "threshold": self.threshold,
            "gate": self.gate,
        }


@dataclass
class ExperimentResult:
    """Outcome of one experiment run."""
    kind: ExperimentKind
    output_dir: Path
    summary: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    reports: Dict[str, SolverReport] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.error is None and all(r.converged for r in self.reports.values())

    @property
    def exit_code(self) -> int:
        if not self.converged:
            return EXIT_SOLVER
        verify = self.kind in (ExperimentKind.VERIFY_TEST1, ExperimentKind.VERIFY_TEST2)
        if verify and any(c.gate and not c.passed for c in self.checks):
            return EXIT_THRESHOLD
        return EXIT_OK

    @property
    def status(self) -> str:
        return {EXIT_OK: "success", EXIT_SOLVER: "solver_failure", EXIT_THRESHOLD: "threshold_breach"}[self.exit_code]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "status": self.status,
            "exit_code": self.exit_code,
            "output_dir": str(self.output_dir),
            "summary": self.summary,
            "checks": [c.to_dict() for c in self.checks],
            "reports": {k: r.to_dict() for k, r in self.reports.items()},
            "files": [str(f) for f in self.files],
            "error": self.error,
        }


@dataclass
class PointAnalysis:
    """A solved problem with its derived quantities."""
    problem: PlateProblem
    state: PlateState
    report: SolverReport
    energies: EnergyBreakdown
    v_profile: Profile
    w_profile: Profile
    system: Dict[str, Any]


# ---------------------------------------------------------------------------
# shared steps


@lru_cache(maxsize=4)
def _cached_space(mesh_h: float, mesh_path: Optional[str]) -> Tuple[Mesh, DofMap]:
    mesh = import_msh(mesh_path) if mesh_path else generate_disc_mesh(mesh_h)
    return mesh, build_dofmap(mesh)


def load_space(mesh_h: float, mesh_path: Optional[Path] = None) -> Tuple[Mesh, DofMap]:
    """Mesh and dofmap, built once per process for each mesh source."""
    mesh, dofmap = _cached_space(float(mesh_h), str(mesh_path) if mesh_path else None)
    logger.info("mesh: %s", mesh)
    return mesh, dofmap


def solve_problem(
    problem: PlateProblem,
    dofmap: DofMap,
    solver: SolverConfig,
    monitor: Optional[Monitor] = None,
    run_id: str = "run",
    continuation_steps: Optional[int] = None,
) -> Tuple[PlateState, SolverReport]:
    """Newton from the zero state, or a continuation ramp when more than one step is requested."""
    steps = solver.continuation_steps if continuation_steps is None else continuation_steps
    callbacks = {}
    if monitor is not None:
        callbacks = {"on_iteration": monitor.track_iteration, "on_failure": monitor.track_failure}
    if steps <= 1:
        return newton_solve(problem, PlateState.zeros(dofmap), solver, run_id=run_id, **callbacks)
    parameter = solver.continuation_parameter
    ramp = continuation_ramp(getattr(problem, parameter), steps)
    logger.info("[%s] continuation over %s: %s", run_id, parameter, ", ".join(f"{x:.3g}" for x in ramp))
    state, report, _ = continuation_solve(
        problem, ramp, solver, dofmap=dofmap, parameter=parameter, run_id=run_id, **callbacks,
    )
    return state, report


def analyze(
    problem: PlateProblem,
    dofmap: DofMap,
    solver: SolverConfig,
    n_samples: int,
    monitor: Optional[Monitor] = None,
    run_id: str = "run",
    continuation_steps: Optional[int] = None,
) -> PointAnalysis:
    state, report = solve_problem(problem, dofmap, solver, monitor, run_id, continuation_steps)
    return PointAnalysis(
        problem=problem,
        state=state,
        report=report,
        energies=compute_energies(state, problem),
        v_profile=extract_profile(state.v, n_samples=n_samples, name="v"),
        w_profile=extract_profile(state.w, n_samples=n_samples, name="w"),
        system=system_statistics(dofmap, assemble_jacobian(state, problem)),
    )


def versions() -> Dict[str, str]:
    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "meshio": meshio.__version__,
    }


def loglog_slope(x, y) -> Optional[float]:
    """Least-squares slope of log y against log x; ``None`` with fewer than two positive pairs."""
    x, y = np.asarray(x, dtype=float), np.abs(np.asarray(y, dtype=float))
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def _output_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(result: ExperimentResult, config: RunConfig, mesh: Mesh, system: Dict[str, Any],
                    monitor: Monitor) -> Path:
    manifest = {
        "experiment": config.kind.value,
        "status": result.status,
        "exit_code": result.exit_code,
        "config": config.to_dict(),
        "mesh": mesh.statistics(),
        "system": system,
        "solver_reports": {k: r.to_dict() for k, r in result.reports.items()},
        "summary": result.summary,
        "checks": [c.to_dict() for c in result.checks],
        "monitor": monitor.get_dashboard(),
        "performance": get_performance_summary(get_performance_log().data),
        "versions": versions(),
        "files": [str(f) for f in result.files],
    }
    path = write_json(Path(result.output_dir) / "manifest.json", manifest)
    result.files.append(path)
    return path


def _problem(config: RunConfig, variant: FormulationVariant, **changes) -> PlateProblem:
    data = {
        "beta": config.beta,
        "gamma": config.resolved_gamma(),
        "nu": config.nu,
        "alpha": config.alpha,
        "variant": variant,
        "load": uniform_load(config.load) if config.load else None,
        "load_label": f"uniform({config.load:g})" if config.load else "zero",
    }
    data.update(changes)
    return PlateProblem(**data)


def _energy_record(label: str, point: PointAnalysis, **extra) -> Dict[str, Any]:
    record = {"label": label}
    record.update(point.energies.to_dict())
    record.update(extra)
    record.update({
        "iterations": point.report.iterations,
        "converged": point.report.converged,
        "final_residual": point.report.final_residual,
    })
    return record


# ---------------------------------------------------------------------------
# verification runs


def run_verify_test1(config: RunConfig, monitor: Optional[Monitor] = None) -> ExperimentResult:
    """Manufactured solution under pressure (γβ⁴ = 1) for every configured variant."""
    monitor = monitor or Monitor()
    out = _output_dir(config)
    mesh, dofmap = load_space(config.mesh_h, config.mesh_path)
    exact = test1_exact(config.nu)
    if config.gamma is not None and not np.isclose(config.load_factor, 1.0):
        logger.warning("test1 runs with γβ⁴ = 1; ignoring gamma = %g", config.gamma)
    gamma = config.beta ** -4

    result = ExperimentResult(kind=config.kind, output_dir=out)
    n = config.n_profile_samples
    profiles = [
        extract_profile(exact.v, n_samples=n, name="v_exact"),
        extract_profile(exact.w, n_samples=n, name="w_exact"),
    ]
    records, points, system = [], {}, {}
    for variant in config.variants:
        problem = _problem(config, variant, gamma=gamma, load=exact.load, load_label="test1")
        point = analyze(problem, dofmap, config.solver, n, monitor, run_id=f"test1/{variant.value}")
        points[variant] = point
        system = point.system
        result.reports[variant.value] = point.report
        errors = energy_errors(point.energies, exact.energies)
        records.append(_energy_record(variant.value, point, **errors.to_dict()))
        profiles += [replace(point.v_profile, name=f"v_{variant.value}"),
                     replace(point.w_profile, name=f"w_{variant.value}")]
        result.checks.append(Check(
            f"energy_errors_{variant.value}",
            errors.within(ENERGY_TOLERANCE_PERCENT),
            errors.to_dict(),
            f"|e| <= {ENERGY_TOLERANCE_PERCENT}%",
        ))
        result.files.append(write_vtk(out / f"fields_{variant.value}.vtk", point.state))
        logger.info(
            "test1 %s: e_b=%s e_m=%s e_c=%s", variant.value,
            *(f"{e:+.3f}%" if e is not None else "n/a" for e in (errors.bending, errors.membrane, errors.coupling)),
        )

    result.checks += _variant_checks(points)
    result.summary = {
        "load_factor": 1.0,
        "gamma": gamma,
        "exact_energies": exact.energies.to_dict(),
        "energies": records,
    }
    result.files.append(write_records_csv(out / "energies.csv", records))
    result.files.append(write_profiles_csv(out / "profiles.csv", profiles))
    _write_manifest(result, config, mesh, system, monitor)
    return result


def run_verify_test2(config: RunConfig, monitor: Optional[Monitor] = None) -> ExperimentResult:
    """Opposite disclination pair at ±y1 with p = 0; only the membrane energy is compared."""
    monitor = monitor or Monitor()
    out = _output_dir(config)
    mesh, dofmap = load_space(config.mesh_h, config.mesh_path)
    exact = test2_exact(config.beta, config.y1)

    result = ExperimentResult(kind=config.kind, output_dir=out)
    n = config.n_profile_samples
    exact_v = extract_profile(exact.v, n_samples=n, name="v_exact")
    profiles = [exact_v]
    records, points, system = [], {}, {}
    for variant in config.variants:
        problem = _problem(config, variant, load=None, load_label="zero", disclinations=exact.disclinations)
        point = analyze(problem, dofmap, config.solver, n, monitor, run_id=f"test2/{variant.value}")
        points[variant] = point
        system = point.system
        result.reports[variant.value] = point.report
        errors = energy_errors(point.energies, exact.energies, terms=("membrane",))
        w_inf = float(np.max(np.abs(point.state.w.coefficients), initial=0.0))
        v_inf = float(np.max(np.abs(point.state.v.coefficients), initial=0.0))
        values = point.v_profile.values
        antisymmetry = float(np.max(np.abs(values + values[::-1]))) / max(point.v_profile.max_abs, 1e-300)
        records.append(_energy_record(variant.value, point, e_m=errors.membrane, w_inf=w_inf, v_inf=v_inf))
        profiles.append(replace(point.v_profile, name=f"v_{variant.value}"))
        result.checks += [
            Check(f"membrane_error_{variant.value}", errors.within(ENERGY_TOLERANCE_PERCENT, ["membrane"]),
                  errors.membrane, f"|e_m| <= {ENERGY_TOLERANCE_PERCENT}%"),
            Check(f"w_vanishes_{variant.value}", w_inf <= 1e-8 * max(v_inf, 1.0), w_inf, "1e-8·max(|v|∞, 1)"),
            Check(f"v_antisymmetric_{variant.value}", antisymmetry <= 1e-6, antisymmetry, 1e-6, gate=False),
        ]
        logger.info("test2 %s: e_m=%s |w|∞=%.2e", variant.value,
                    f"{errors.membrane:+.3f}%" if errors.membrane is not None else "n/a", w_inf)

    result.checks += _variant_checks(points, fields=("v",))
    result.summary = {"y1": list(config.y1), "exact_energies": exact.energies.to_dict(), "energies": records}
    result.files.append(write_records_csv(out / "energies.csv", records))
    result.files.append(write_profiles_csv(out / "profiles.csv", profiles))
    _write_manifest(result, config, mesh, system, monitor)
    return result


def _variant_checks(points: Dict[FormulationVariant, PointAnalysis], fields=("v", "w")) -> List[Check]:
    """Pointwise slice agreement of every variant with VAR, relative to the slice max."""
    reference = points.get(FormulationVariant.VAR)
    checks = []
    if reference is None:
        return checks
    for variant, point in points.items():
        if variant is FormulationVariant.VAR:
            continue
        for name in fields:
            ref_profile = getattr(reference, f"{name}_profile")
            if ref_profile.max_abs == 0.0:
                continue
            deviation = profile_deviation(getattr(point, f"{name}_profile"), ref_profile)
            checks.append(Check(f"{name}_profile_{variant.value}_vs_var", deviation <= VARIANT_TOLERANCE,
                                deviation, VARIANT_TOLERANCE))
    return checks


# ---------------------------------------------------------------------------
# parametric studies (one scheduler task per point)


def _point_payload(config: RunConfig, variant: FormulationVariant, beta: float, gamma: float,
                   disclinations: DisclinationSet, run_id: str, kl: bool = False, exports: bool = False,
                   continuation_steps: Optional[int] = None) -> Dict[str, Any]:
    return {
        "mesh_h": config.mesh_h,
        "mesh_path": str(config.mesh_path) if config.mesh_path else None,
        "problem": {
            "beta": beta, "gamma": gamma, "nu": config.nu, "alpha": config.alpha,
            "variant": variant.value, "load": config.load,
            "positions": [list(p) for p in disclinations.positions],
            "angles": list(disclinations.angles),
            "label": disclinations.label,
        },
        "solver": config.solver.to_dict(),
        "continuation_steps": continuation_steps,
        "n_samples": config.n_profile_samples,
        "heatmap_resolution": config.heatmap_resolution,
        "kl": kl,
        "exports": exports,
        "run_id": run_id,
        "parent_pid": os.getpid(),
    }


def solve_point(task: Task) -> Dict[str, Any]:
    """Scheduler worker: solve one point, write its files and return plain data."""
    payload = task.payload
    if os.getpid() != payload["parent_pid"]:
        # pool workers are reused; report only this point
        get_performance_log().reset()
    params = payload["problem"]
    _, dofmap = load_space(payload["mesh_h"], payload["mesh_path"])
    problem = PlateProblem(
        beta=params["beta"], gamma=params["gamma"], nu=params["nu"], alpha=params["alpha"],
        variant=params["variant"],
        load=uniform_load(params["load"]) if params["load"] else None,
        load_label=f"uniform({params['load']:g})" if params["load"] else "zero",
        disclinations=DisclinationSet(tuple(map(tuple, params["positions"])), tuple(params["angles"]), params["label"]),
    )
    monitor = Monitor()
    point = analyze(problem, dofmap, SolverConfig(**payload["solver"]), payload["n_samples"], monitor,
                    run_id=payload["run_id"], continuation_steps=payload["continuation_steps"])
    out = task.output_dir
    files = [write_profiles_csv(out / "profiles.csv", [point.v_profile, point.w_profile])]
    data: Dict[str, Any] = {
        "label": task.label,
        "energies": point.energies.to_dict(),
        "report": point.report.to_dict(),
        "converged": point.report.converged,
        "abscissae": point.v_profile.abscissae,
        "v": point.v_profile.values,
        "w": point.w_profile.values,
        "system": point.system,
        "events": monitor.events,
        "pid": os.getpid(),
        "performance": dict(get_performance_log().data),
    }

    if payload["kl"]:
        v_kl = solve_kl_membrane(dofmap, problem)
        w_kl = solve_kl_bending(dofmap, problem)
        data["kl"] = {
            "membrane_numeric": hessian_energy(v_kl),
            "bending_numeric": problem.c_nu * hessian_energy(w_kl),
            "membrane_exact": kl_membrane_energy(problem.beta) * float(np.sum(np.square(problem.disclinations.angles))),
            "bending_exact": kl_bending_energy(problem.gamma, problem.beta, problem.c_nu) * params["load"] ** 2,
        }

    if payload["exports"]:
        state = point.state
        curvature = gaussian_curvature_field(state.w)
        maps = heat_maps(state.v, state.w, payload["heatmap_resolution"])
        sigma = maps["sigma_rr"][np.isfinite(maps["sigma_rr"])]
        scale = float(np.max(np.abs(sigma))) if sigma.size else 0.0
        coords = dofmap.dof_coordinates[dofmap.free_dofs]
        w_values = state.w.coefficients
        k_min = int(np.argmin(w_values)) if len(w_values) else 0
        data["curvature"] = curvature.to_dict()
        data["stress"] = {
            "min": float(sigma.min()) if sigma.size else 0.0,
            "max": float(sigma.max()) if sigma.size else 0.0,
            "max_abs": scale,
            "non_negative": bool(sigma.size and sigma.min() >= -1e-3 * scale),
            "non_positive": bool(sigma.size and sigma.max() <= 1e-3 * scale),
        }
        data["deflection"] = {
            "min": float(w_values[k_min]) if len(w_values) else 0.0,
            "argmin": coords[k_min].tolist() if len(w_values) else [0.0, 0.0],
            "max": float(np.max(w_values, initial=0.0)),
        }
        files.append(write_vtk(out / "fields.vtk", state))
        files.append(write_grid_csv(out / "heatmaps.csv", maps, ["sigma_rr", "ww"]))
    data["files"] = [str(f) for f in files]
    return data


def _run_points(config: RunConfig, labels: List[str], payloads: List[Dict[str, Any]],
                monitor: Monitor, result: ExperimentResult) -> List[Dict[str, Any]]:
    scheduler = TaskScheduler(SchedulerConfig(max_workers=config.workers, point_dir_format="point_{index:02d}_{label}"))
    tasks = scheduler.make_tasks(result.output_dir, labels, payloads)
    points = []
    for task_result in scheduler.run(tasks, solve_point):
        if not task_result.success:
            result.error = f"{task_result.label}: {task_result.error}"
            result.reports[task_result.label] = SolverReport(reason=task_result.error)
            continue
        data = task_result.data
        monitor.merge(data.pop("events"))
        if data["pid"] != os.getpid():
            get_performance_log().merge(data["performance"])
        result.reports[task_result.label] = SolverReport(
            iterations=data["report"]["iterations"],
            residual_history=list(data["report"]["residual_history"]),
            converged=data["report"]["converged"],
            damping_history=list(data["report"]["damping_history"]),
            reason=data["report"]["reason"],
            singular_pivot=data["report"]["singular_pivot"],
            continuation_steps=data["report"]["continuation_steps"],
            stop_criterion=data["report"]["stop_criterion"],
            residual_floor=data["report"]["residual_floor"],
        )
        result.files += [Path(f) for f in data["files"]]
        points.append(data)
    return points


def _sweep_profiles(points: List[Dict[str, Any]], field_name: str, factors: List[float], prefix: str) -> List[Profile]:
    return [
        Profile(np.asarray(p["abscissae"]), np.asarray(p[field_name]) / f, name=f"{prefix}{p['label']}")
        for p, f in zip(points, factors)
    ]


def run_sweep_beta(config: RunConfig, monitor: Optional[Monitor] = None) -> ExperimentResult:
    """Aspect-ratio study with γβ⁴ fixed (1 unless γ is set) and one disclination at the origin."""
    monitor = monitor or Monitor()
    out = _output_dir(config)
    mesh, dofmap = load_space(config.mesh_h, config.mesh_path)
    variant = config.variants[0]
    disclinations = _disclinations(config) or single_disclination(-1.0)
    betas = list(config.sweep_values)
    labels = [f"beta={b:g}" for b in betas]
    payloads = [
        _point_payload(config, variant, b, config.gamma if config.gamma is not None else b ** -4,
                       disclinations, f"sweep-beta/{label}", kl=True)
        for b, label in zip(betas, labels)
    ]
    result = ExperimentResult(kind=config.kind, output_dir=out)
    points = _run_points(config, labels, payloads, monitor, result)
    done = [b for b, label in zip(betas, labels) if any(p["label"] == label for p in points)]

    records = []
    for b, p in zip(done, points):
        e = p["energies"]
        records.append({
            "beta": b, "gamma": config.gamma if config.gamma is not None else b ** -4,
            "membrane": e["membrane"], "bending": e["bending"], "coupling": e["coupling"],
            "membrane_kl": p["kl"]["membrane_exact"], "bending_kl": p["kl"]["bending_exact"],
            "membrane_kl_numeric": p["kl"]["membrane_numeric"], "bending_kl_numeric": p["kl"]["bending_numeric"],
            "membrane_ratio": e["membrane"] / p["kl"]["membrane_exact"] if p["kl"]["membrane_exact"] else None,
            "iterations": p["report"]["iterations"], "converged": p["converged"],
        })

    slope = loglog_slope(done, [r["membrane"] for r in records])
    ratios = [r["membrane_ratio"] for r in records if r["membrane_ratio"] is not None]
    similarity = self_similarity(_sweep_profiles(points, "v", [1.0] * len(points), "v_"), [b ** 2 for b in done]) \
        if len(points) > 1 else 0.0
    bending = [r["bending"] for r in records]
    result.checks += [
        Check("membrane_slope", slope is not None and abs(slope - 4.0) <= 0.05, slope, "4.00 ± 0.05"),
        Check("membrane_kl_ratio", bool(ratios) and all(0.95 <= r <= 1.05 for r in ratios), ratios, "[0.95, 1.05]"),
        Check("bending_decreases", len(bending) > 1 and bending[-1] < bending[0], bending, "E_b(β_max) < E_b(β_min)",
              gate=False),
        Check("v_self_similar", similarity <= 0.02, similarity, 0.02, gate=False),
    ]
    result.summary = {"variant": variant.value, "membrane_slope": slope, "v_over_beta2_deviation": similarity,
                      "points": records}
    result.files.append(write_records_csv(out / "sweep_beta.csv", records))
    result.files.append(write_profiles_csv(out / "profiles_v_over_beta2.csv",
                                           _sweep_profiles(points, "v", [b ** 2 for b in done], "v_")))
    _write_manifest(result, config, mesh, points[-1]["system"] if points else system_statistics(dofmap), monitor)
    return result


def run_sweep_gamma(config: RunConfig, monitor: Optional[Monitor] = None) -> ExperimentResult:
    """Load study at fixed β with one disclination at the origin; large γ uses continuation."""
    monitor = monitor or Monitor()
    out = _output_dir(config)
    mesh, dofmap = load_space(config.mesh_h, config.mesh_path)
    variant = config.variants[0]
    disclinations = _disclinations(config) or single_disclination(-1.0)
    gammas = list(config.sweep_values)
    labels = [f"gamma={g:g}" for g in gammas]
    payloads = []
    for g, label in zip(gammas, labels):
        steps = None
        if g > NONLINEAR_GAMMA and config.solver.continuation_steps == 1:
            steps = AUTO_CONTINUATION_STEPS
        payloads.append(_point_payload(config, variant, config.beta, g, disclinations, f"sweep-gamma/{label}",
                                       kl=True, continuation_steps=steps))
    result = ExperimentResult(kind=config.kind, output_dir=out)
    points = _run_points(config, labels, payloads, monitor, result)
    done = [g for g, label in zip(gammas, labels) if any(p["label"] == label for p in points)]

    records = []
    for g, p in zip(done, points):
        e = p["energies"]
        records.append({
            "gamma": g, "beta": config.beta,
            "membrane": e["membrane"], "bending": e["bending"], "coupling": e["coupling"],
            "membrane_kl": p["kl"]["membrane_exact"], "bending_kl": p["kl"]["bending_exact"],
            "regime": "nonlinear" if g > NONLINEAR_GAMMA else "linear",
            "iterations": p["report"]["iterations"], "converged": p["converged"],
        })

    small = [k for k, g in enumerate(done) if g <= NONLINEAR_GAMMA]
    if len(small) < 2:
        small = list(range(len(done)))
    slope = loglog_slope([done[k] for k in small], [records[k]["bending"] for k in small])
    membrane = [records[k]["membrane"] for k in small]
    flatness = (max(membrane) - min(membrane)) / max(abs(m) for m in membrane) if membrane else None

    w_profiles = _sweep_profiles([points[k] for k in small], "w", [1.0] * len(small), "w_")
    w_similarity = self_similarity(w_profiles, [done[k] for k in small]) if len(small) > 1 else 0.0
    v_change = None
    if len(done) > 1:
        first = np.max(np.abs(points[0]["v"]))
        target = int(np.argmin(np.abs(np.log(np.asarray(done) / 6.25e-4))))
        if first > 0 and target > 0:
            v_change = float(np.max(np.abs(points[target]["v"])) / first - 1.0)

    excess = {}
    coupling_fit = loglog_slope([done[k] for k in small], [records[k]["coupling"] for k in small])
    if coupling_fit is not None:
        k0 = small[0]
        for k, g in enumerate(done):
            if g > NONLINEAR_GAMMA and records[k0]["coupling"] != 0.0:
                extrapolated = abs(records[k0]["coupling"]) * (g / done[k0]) ** 2
                excess[f"{g:g}"] = abs(records[k]["coupling"]) / extrapolated - 1.0

    result.checks += [
        Check("bending_slope", slope is not None and abs(slope - 2.0) <= 0.05, slope, "2.00 ± 0.05"),
        Check("membrane_flat", flatness is not None and flatness <= 0.02, flatness, 0.02),
        Check("w_over_gamma_self_similar", w_similarity <= 0.02, w_similarity, 0.02, gate=False),
    ]
    result.summary = {
        "variant": variant.value, "beta": config.beta, "bending_slope": slope, "membrane_flatness": flatness,
        "w_over_gamma_deviation": w_similarity, "v_max_abs_change": v_change,
        "coupling_slope_small_gamma": coupling_fit, "coupling_excess_over_quadratic": excess,
        "nonlinear_gamma": NONLINEAR_GAMMA, "points": records,
    }
    result.files.append(write_records_csv(out / "sweep_gamma.csv", records))
    result.files.append(write_profiles_csv(out / "profiles_v.csv", _sweep_profiles(points, "v", [1.0] * len(points), "v_")))
    result.files.append(write_profiles_csv(out / "profiles_w_over_gamma.csv",
                                           _sweep_profiles(points, "w", list(done), "w_")))
    _write_manifest(result, config, mesh, points[-1]["system"] if points else system_statistics(dofmap), monitor)
    return result


def _disclinations(config: RunConfig) -> Optional[DisclinationSet]:
    if config.disclinations:
        return DisclinationSet.from_pairs(config.disclinations, label="custom")
    return None


# ---------------------------------------------------------------------------
# field studies


def run_disclinations(config: RunConfig, monitor: Optional[Monitor] = None) -> ExperimentResult:
    """Presets (or a custom set) under uniform pressure; exports fields, heat maps and sign summaries."""
    monitor = monitor or Monitor()
    out = _output_dir(config)
    mesh, dofmap = load_space(config.mesh_h, config.mesh_path)
    variant = config.variants[0]
    custom = _disclinations(config)
    sets = [custom] if custom is not None else [get_preset(name) for name in config.presets]
    labels = [s.label for s in sets]
    payloads = [
        _point_payload(config, variant, config.beta, config.resolved_gamma(), s, f"disclinations/{s.label}",
                       exports=True)
        for s in sets
    ]
    result = ExperimentResult(kind=config.kind, output_dir=out)
    points = _run_points(config, labels, payloads, monitor, result)

    records = []
    for p in points:
        curvature, stress, deflection = p["curvature"], p["stress"], p["deflection"]
        label = p["label"]
        records.append({
            "preset": label,
            **{k: p["energies"][k] for k in ("membrane", "bending", "coupling")},
            "ww_integral": curvature["integral"], "ww_abs_integral": curvature["absolute_integral"],
            "ww_mean_ratio": curvature["mean_ratio"], "ww_both_signs": curvature["both_signs"],
            "sigma_rr_min": stress["min"], "sigma_rr_max": stress["max"],
            "w_min": deflection["min"], "w_max": deflection["max"],
            "iterations": p["report"]["iterations"], "converged": p["converged"],
        })
        result.checks.append(Check(f"mean_curvature_{label}", curvature["mean_ratio"] <= MEAN_CURVATURE_TOLERANCE,
                                   curvature["mean_ratio"], MEAN_CURVATURE_TOLERANCE))
        if label == "four-negative":
            result.checks += [
                Check("sigma_rr_non_negative_four-negative", stress["non_negative"], stress["min"], ">= -1e-3·max"),
                Check("deflects_downward_four-negative",
                      deflection["min"] < 0 and np.hypot(*deflection["argmin"]) < 1.0,
                      deflection, "min w < 0 attained inside"),
            ]
        elif label == "four-positive":
            result.checks.append(Check("sigma_rr_non_positive_four-positive", stress["non_positive"], stress["max"],
                                       "<= 1e-3·max"))
        elif label in ("flower", "inverted-flower"):
            result.checks.append(Check(f"curvature_both_signs_{label}", curvature["both_signs"], None,
                                       "[w,w] takes both signs"))

    result.summary = {"variant": variant.value, "beta": config.beta, "gamma": config.resolved_gamma(),
                      "presets": records}
    result.files.append(write_records_csv(out / "disclinations.csv", records))
    _write_manifest(result, config, mesh, points[-1]["system"] if points else system_statistics(dofmap), monitor)
    return result


def run_custom(config: RunConfig, monitor: Optional[Monitor] = None) -> ExperimentResult:
    """Single solve per variant from explicit parameters."""
    monitor = monitor or Monitor()
    out = _output_dir(config)
    mesh, dofmap = load_space(config.mesh_h, config.mesh_path)
    disclinations = _disclinations(config)
    if disclinations is None and config.presets:
        disclinations = get_preset(config.presets[0])
    disclinations = disclinations or DisclinationSet()

    result = ExperimentResult(kind=config.kind, output_dir=out)
    records, profiles, system = [], [], {}
    for variant in config.variants:
        problem = _problem(config, variant, disclinations=disclinations)
        point = analyze(problem, dofmap, config.solver, config.n_profile_samples, monitor,
                        run_id=f"custom/{variant.value}")
        system = point.system
        result.reports[variant.value] = point.report
        curvature = gaussian_curvature_field(point.state.w)
        records.append(_energy_record(variant.value, point, ww_integral=curvature.integral,
                                      ww_mean_ratio=curvature.mean_ratio))
        profiles += [replace(point.v_profile, name=f"v_{variant.value}"),
                     replace(point.w_profile, name=f"w_{variant.value}")]
        result.files.append(write_vtk(out / f"fields_{variant.value}.vtk", point.state))
        maps = heat_maps(point.state.v, point.state.w, config.heatmap_resolution)
        result.files.append(write_grid_csv(out / f"heatmaps_{variant.value}.csv", maps, ["sigma_rr", "ww"]))

    result.summary = {"problem": _problem(config, config.variants[0], disclinations=disclinations).to_dict(),
                      "energies": records}
    result.files.append(write_records_csv(out / "energies.csv", records))
    result.files.append(write_profiles_csv(out / "profiles.csv", profiles))
    _write_manifest(result, config, mesh, system, monitor)
    return result


RUNNERS: Dict[ExperimentKind, Callable[[RunConfig, Optional[Monitor]], ExperimentResult]] = {
    ExperimentKind.VERIFY_TEST1: run_verify_test1,
    ExperimentKind.VERIFY_TEST2: run_verify_test2,
    ExperimentKind.SWEEP_BETA: run_sweep_beta,
    ExperimentKind.SWEEP_GAMMA: run_sweep_gamma,
    ExperimentKind.DISCLINATIONS: run_disclinations,
    ExperimentKind.CUSTOM: run_custom,
}


class Supervisor:
    """
    Runs one configured experiment.

    Responsibilities:
    - dispatch to the experiment runner
    - own the run monitor
    - turn the outcome into an exit code
    """

    def __init__(self, config: RunConfig, monitor: Optional[Monitor] = None):
        self.config = config
        self.monitor = monitor or Monitor()

    def run(self) -> ExperimentResult:
        get_performance_log().reset()
        runner = RUNNERS[self.config.kind]
        logger.info("running %s into %s", self.config.kind.value, self.config.output_dir)
        result = runner(self.config, self.monitor)
        logger.info("%s finished: %s (exit %d)", self.config.kind.value, result.status, result.exit_code)
        return result
