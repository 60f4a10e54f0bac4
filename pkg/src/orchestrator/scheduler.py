"""
Task Scheduler - parallel execution of sweep points.

Each point runs in its own output directory. With one worker the tasks run
in-process; otherwise a process pool executes them. Results are merged in
task order, so the outcome does not depend on completion order.
"""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from ..config import get_worker_count

logger = logging.getLogger(__name__)


@dataclass
class SchedulerConfig:
    """Scheduler configuration."""
    max_workers: int = 1
    point_dir_format: str = "point_{index:02d}"

    @classmethod
    def from_env(cls) -> "SchedulerConfig":
        return cls(max_workers=get_worker_count())


@dataclass
class Task:
    """One sweep point."""
    index: int
    label: str
    output_dir: Path
    payload: Dict[str, Any] = field(default_factory=dict)


@dataclass
class TaskResult:
    index: int
    label: str
    success: bool
    data: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None


def _run_task(fn: Callable[[Task], Dict[str, Any]], task: Task) -> TaskResult:
    try:
        return TaskResult(task.index, task.label, True, fn(task))
    except Exception as e:
        logger.exception("task %s failed", task.label)
        return TaskResult(task.index, task.label, False, error=f"{type(e).__name__}: {e}")


class TaskScheduler:
    """Runs tasks sequentially or on a process pool and merges them in order."""

    def __init__(self, config: Optional[SchedulerConfig] = None):
        self.config = config or SchedulerConfig()

    def make_tasks(self, root: Path, labels: List[str], payloads: List[Dict[str, Any]]) -> List[Task]:
        """One task per payload, each with its own directory under ``root``."""
        tasks = []
        for index, (label, payload) in enumerate(zip(labels, payloads)):
            directory = Path(root) / self.config.point_dir_format.format(index=index, label=label)
            tasks.append(Task(index=index, label=label, output_dir=directory, payload=payload))
        return tasks

    def run(self, tasks: List[Task], fn: Callable[[Task], Dict[str, Any]]) -> List[TaskResult]:
        """
        Execute ``fn`` on every task.

        ``fn`` must be a module-level function when more than one worker is
        used. Exceptions inside a task become failed ``TaskResult`` records.
        """
        for task in tasks:
            task.output_dir.mkdir(parents=True, exist_ok=True)
        workers = min(self.config.max_workers, len(tasks))
        if workers <= 1:
            results = [_run_task(fn, task) for task in tasks]
        else:
            logger.info("running %d tasks on %d workers", len(tasks), workers)
            results = []
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(_run_task, fn, task): task for task in tasks}
                for future in as_completed(futures):
                    results.append(future.result())
        return sorted(results, key=lambda r: r.index)
