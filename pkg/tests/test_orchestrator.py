"""
Orchestrator tests: run-file parsing, scheduling, monitoring, supervised runs and the CLI.
"""

import csv
import json
import os
import sys
import tempfile
from pathlib import Path

project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.callbacks import FailureEvent, IterationEvent
from src.cli import main as cli_main
from src.errors import ConfigError
from src.models import ExperimentKind, FormulationVariant, SolverReport
from src.orchestrator import (
    EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_THRESHOLD, Check, ExperimentResult, Monitor,
    SchedulerConfig, Supervisor, TaskScheduler, build_run_config, loglog_slope, validate_run_data,
)

RUN_FILE = """
[experiment]
kind = "custom"

[mesh]
h = 0.3

[problem]
beta = 15.0
variants = ["var", "cmn18"]
disclinations = [{position = [0.1, 0.0], angle = -1.0}]

[solver]
max_iters = 25

[output]
profile_samples = 21
"""


def _write(text: str, suffix: str = ".toml") -> Path:
    handle = tempfile.NamedTemporaryFile("w", suffix=suffix, delete=False, encoding="utf-8")
    handle.write(text)
    handle.close()
    return Path(handle.name)


def _expect_config_error(**kwargs):
    try:
        build_run_config(**kwargs)
    except ConfigError:
        return
    raise AssertionError(f"accepted {kwargs}")


def test_defaults_per_experiment():
    config = build_run_config("sweep-gamma")
    assert config.beta == 20.0
    assert config.variants == [FormulationVariant.VAR]
    assert config.sweep_values[0] == 6.25e-7
    verify = build_run_config("verify-test1")
    assert verify.gamma is None and verify.load_factor == 1.0
    assert len(verify.variants) == 3
    assert verify.resolved_gamma() == 100.0 ** -4


def test_precedence_file_then_command_line():
    path = _write(RUN_FILE)
    config = build_run_config(run_file=path)
    assert config.kind is ExperimentKind.CUSTOM
    assert config.beta == 15.0
    assert config.variants == [FormulationVariant.VAR, FormulationVariant.CMN18]
    assert config.disclinations == [((0.1, 0.0), -1.0)]
    assert config.solver.max_iters == 25
    assert config.n_profile_samples == 21

    config = build_run_config(run_file=path, overrides={"beta": 30.0, "max_iters": 7, "nu": None})
    assert config.beta == 30.0 and config.solver.max_iters == 7
    assert config.nu == 0.15


def test_environment_defaults():
    previous = os.environ.get("FVK_PENALTY")
    os.environ["FVK_PENALTY"] = "120"
    try:
        assert build_run_config("custom").alpha == 120.0
        assert build_run_config("custom", overrides={"alpha": 50.0}).alpha == 50.0
    finally:
        if previous is None:
            del os.environ["FVK_PENALTY"]
        else:
            os.environ["FVK_PENALTY"] = previous


def test_mesh_h_on_command_line_replaces_mesh_file():
    path = _write('[experiment]\nkind = "custom"\n[mesh]\npath = "disc.msh"\n')
    assert build_run_config(run_file=path).mesh_path == Path("disc.msh")
    assert build_run_config(run_file=path, overrides={"mesh_h": 0.2}).mesh_path is None


def test_schema_violations():
    validate_run_data({})
    for data in (
        {"problem": {"beta": -1.0}},
        {"problem": {"variants": ["fancy"]}},
        {"mesh": {"size": 0.1}},
        {"experiment": {"seed": 1}},
        {"problem": {"disclinations": [{"position": [0.0, 0.0]}]}},
    ):
        try:
            validate_run_data(data)
        except ConfigError:
            continue
        raise AssertionError(f"schema accepted {data}")


def test_config_errors():
    _expect_config_error()
    _expect_config_error(kind="sweep-delta")
    _expect_config_error(kind="sweep-beta", overrides={"sweep_values": [10.0, 5.0]})
    _expect_config_error(kind="custom", overrides={"mesh_h": 1.5})
    _expect_config_error(kind="custom", run_file=Path(tempfile.mkdtemp()) / "missing.toml")
    _expect_config_error(kind="custom", run_file=_write("[problem\nbeta = 1"))
    _expect_config_error(kind="custom", overrides={"max_iters": 0})


def _double(task):
    if task.payload["value"] < 0:
        raise RuntimeError("negative input")
    return {"value": 2 * task.payload["value"]}


def test_scheduler_order_and_failures():
    root = Path(tempfile.mkdtemp())
    scheduler = TaskScheduler(SchedulerConfig(max_workers=1, point_dir_format="point_{index:02d}_{label}"))
    tasks = scheduler.make_tasks(root, ["a", "b", "c"], [{"value": 1}, {"value": -1}, {"value": 3}])
    results = scheduler.run(tasks, _double)
    assert [r.index for r in results] == [0, 1, 2]
    assert results[0].data == {"value": 2} and results[2].data == {"value": 6}
    assert not results[1].success and "negative input" in results[1].error
    assert (root / "point_01_b").is_dir()


def test_monitor_tracks_and_merges():
    worker = Monitor()
    worker.track_iteration(IterationEvent(run_id="p0", iteration=1, residual_norm=1e-3))
    worker.track_iteration(IterationEvent(run_id="p0", iteration=2, residual_norm=1e-9))
    worker.track_failure(FailureEvent(run_id="p1", reason="max_iters", iterations=50))

    parent = Monitor()
    parent.merge(worker.events)
    dashboard = parent.get_dashboard()
    assert dashboard["runs"] == 2
    assert dashboard["total_iterations"] == 2
    assert dashboard["failed_runs"] == ["p1"]
    assert dashboard["status"]["p0"]["residual_norm"] == 1e-9
    assert "failed (max_iters)" in parent.format_dashboard()


def test_exit_codes():
    verify = ExperimentResult(kind=ExperimentKind.VERIFY_TEST1, output_dir=Path("."))
    verify.reports["var"] = SolverReport(converged=True)
    assert verify.exit_code == EXIT_OK
    verify.checks.append(Check("membrane", passed=False, gate=False))
    assert verify.exit_code == EXIT_OK
    verify.checks.append(Check("bending", passed=False))
    assert verify.exit_code == EXIT_THRESHOLD and verify.status == "threshold_breach"
    verify.reports["cmn18"] = SolverReport(converged=False, reason="max_iters")
    assert verify.exit_code == EXIT_SOLVER

    sweep = ExperimentResult(kind=ExperimentKind.SWEEP_BETA, output_dir=Path("."),
                             checks=[Check("membrane_slope", passed=False)])
    assert sweep.exit_code == EXIT_OK


def test_loglog_slope():
    assert abs(loglog_slope([1.0, 2.0, 4.0], [3.0, 12.0, 48.0]) - 2.0) < 1e-12
    assert loglog_slope([1.0, 2.0], [0.0, 1.0]) is None


def test_custom_run_writes_outputs():
    out = Path(tempfile.mkdtemp()) / "custom"
    config = build_run_config("custom", overrides={
        "mesh_h": 0.3, "variants": ["var"], "load": -1.0, "output_dir": out,
        "n_profile_samples": 21, "heatmap_resolution": 11,
    })
    result = Supervisor(config).run()
    assert result.exit_code == EXIT_OK
    assert result.reports["var"].converged
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["experiment"] == "custom" and manifest["status"] == "success"
    assert manifest["system"]["unknowns"] > 0
    assert "numpy" in manifest["versions"]
    with (out / "energies.csv").open(encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert rows[0]["label"] == "var"
    assert float(rows[0]["pressure_work"]) > 0
    assert (out / "fields_var.vtk").exists() and (out / "heatmaps_var.csv").exists()


def test_beta_sweep_writes_table():
    out = Path(tempfile.mkdtemp()) / "beta"
    config = build_run_config("sweep-beta", overrides={
        "mesh_h": 0.3, "sweep_values": [5.0, 10.0], "output_dir": out,
        "n_profile_samples": 21, "workers": 1,
    })
    result = Supervisor(config).run()
    assert result.converged
    assert len(result.reports) == 2
    with (out / "sweep_beta.csv").open(encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert (out / "point_00_beta=5").is_dir()
    assert any(c.name == "membrane_slope" for c in result.checks)


def test_cli_exit_codes():
    assert cli_main(["custom", "--config", str(Path(tempfile.mkdtemp()) / "missing.toml")]) == EXIT_CONFIG
    assert cli_main(["custom", "--mesh-h", "2.0"]) == EXIT_CONFIG
    out = Path(tempfile.mkdtemp()) / "cli"
    code = cli_main([
        "custom", "--mesh-h", "0.3", "--variant", "cmn18", "--beta", "5",
        "--disclination", "0.2,0.1,-0.5", "--out", str(out),
    ])
    assert code == EXIT_OK
    assert (out / "manifest.json").exists()


def main() -> bool:
    tests = [
        test_defaults_per_experiment,
        test_precedence_file_then_command_line,
        test_environment_defaults,
        test_mesh_h_on_command_line_replaces_mesh_file,
        test_schema_violations,
        test_config_errors,
        test_scheduler_order_and_failures,
        test_monitor_tracks_and_merges,
        test_exit_codes,
        test_loglog_slope,
        test_custom_run_writes_outputs,
        test_beta_sweep_writes_table,
        test_cli_exit_codes,
    ]

    passed = 0
    failed = 0
    for test in tests:
        try:
            test()
            passed += 1
            print(f"[PASS] {test.__name__}")
        except Exception as exc:
            failed += 1
            print(f"[FAIL] {test.__name__}: {exc}")

    print(f"summary: passed={passed}, failed={failed}")
    return failed == 0


if __name__ == "__main__":
    ok = main()
    sys.exit(0 if ok else 1)
