# -*- coding: utf-8 -*-
"""
Performance tracking for solver stages.

A decorator records execution time, status and errors of each stage
(mesh, dofmap, assembly, factorization, Newton, post-processing) into a
``PerformanceLog``. Stages run synchronously, so the log is a plain dict.
"""

import time
from functools import wraps
from typing import Any, Callable, Dict, Optional


class PerformanceLog:
    """Collects ``<stage>_duration``/``_calls``/``_status`` entries."""

    def __init__(self):
        self.data: Dict[str, Any] = {}

    def record(self, stage: str, duration: float, status: str, error: Optional[str] = None):
        self.data[f"{stage}_duration"] = self.data.get(f"{stage}_duration", 0.0) + duration
        self.data[f"{stage}_calls"] = self.data.get(f"{stage}_calls", 0) + 1
        self.data[f"{stage}_status"] = status
        if error is not None:
            self.data[f"{stage}_error"] = error

    def merge(self, other: Dict[str, Any]):
        """Add the entries recorded by another process."""
        for key, value in other.items():
            if key.endswith(("_duration", "_calls")):
                self.data[key] = self.data.get(key, 0) + value
            else:
                self.data[key] = value

    def reset(self):
        self.data.clear()


_log = PerformanceLog()


def get_performance_log() -> PerformanceLog:
    """Process-wide log; workers in a pool each have their own."""
    return _log


def track_performance(stage: str):
    """Record the wall time and outcome of each call under ``stage``.

    Args:
        stage: Stage name used as the key prefix in the performance log

    Returns:
        Decorator
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                _log.record(stage, time.perf_counter() - start_time, "error", str(e))
                raise
            _log.record(stage, time.perf_counter() - start_time, "success")
            return result

        return wrapper
    return decorator


def get_performance_summary(performance_data: Dict[str, Any]) -> Dict[str, Any]:
    """Group ``<stage>_duration/_status/_calls`` keys into per-stage records.

    Args:
        performance_data: Flat performance log

    Returns:
        Dict with ``stages`` and ``total_time``
    """
    summary = {
        "stages": {},
        "total_time": 0.0,
    }

    stages = set()
    for key in performance_data.keys():
        if key.endswith("_duration"):
            stages.add(key[: -len("_duration")])

    for stage in sorted(stages):
        duration = performance_data.get(f"{stage}_duration", 0.0)
        summary["stages"][stage] = {
            "duration": duration,
            "status": performance_data.get(f"{stage}_status", "unknown"),
            "calls": performance_data.get(f"{stage}_calls", 1),
        }
        summary["total_time"] += duration

    return summary


def format_performance_report(performance_data: Dict[str, Any]) -> str:
    """Plain-text table of stage timings, slowest first."""
    summary = get_performance_summary(performance_data)

    lines = ["=" * 50]
    lines.append("Performance report")
    lines.append("=" * 50)

    by_duration = sorted(
        summary["stages"].items(),
        key=lambda x: x[1]["duration"],
        reverse=True
    )

    for stage, data in by_duration:
        duration = data["duration"]
        percentage = (duration / summary["total_time"] * 100) if summary["total_time"] > 0 else 0
        lines.append(
            f"{stage:15s}: {duration:8.3f}s ({percentage:5.1f}%) [calls {data['calls']}, {data['status']}]"
        )

    lines.append("=" * 50)
    lines.append(f"Total: {summary['total_time']:.3f}s")

    return "\n".join(lines)
