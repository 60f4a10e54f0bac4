"""
Orchestration Layer - Coordinates experiment runs.

Components:
- supervisor: Experiment runners and exit codes
- parser: Run-file and command-line configuration
- scheduler: Parallel sweep points
- monitor: Solver progress tracking
"""

from .supervisor import (
    EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_THRESHOLD, RUNNERS,
    Check, ExperimentResult, Supervisor, loglog_slope, solve_point, solve_problem,
)
from .parser import RUN_SCHEMA, build_run_config, load_run_file, validate_run_data
from .scheduler import SchedulerConfig, Task, TaskResult, TaskScheduler
from .monitor import Monitor, RunStatus

__all__ = [
    "EXIT_CONFIG", "EXIT_OK", "EXIT_SOLVER", "EXIT_THRESHOLD", "RUNNERS",
    "Check", "ExperimentResult", "Supervisor", "loglog_slope", "solve_point", "solve_problem",
    "RUN_SCHEMA", "build_run_config", "load_run_file", "validate_run_data",
    "SchedulerConfig", "Task", "TaskResult", "TaskScheduler",
    "Monitor", "RunStatus",
]
