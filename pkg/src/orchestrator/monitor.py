"""
Monitor - solver progress tracking.

Tracks:
- Newton iterations per run
- Failed (stuck) solves
- Stage status
"""

from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, List, Optional

from ..callbacks import FailureEvent, IterationEvent


@dataclass
class RunStatus:
    """Latest known state of one solve."""
    run_id: str
    iterations: int = 0
    residual_norm: float = float("nan")
    damping: float = 1.0
    failed: bool = False
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "damping": self.damping,
            "failed": self.failed,
            "reason": self.reason,
        }


class Monitor:
    """Collects solver events; ``track_iteration``/``track_failure`` fit the solver callbacks."""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        self.max_events = int(self.config.get("max_events", 2000))
        self.runs: Dict[str, RunStatus] = {}
        self.failed_runs: List[str] = []
        self.events: List[Dict[str, Any]] = []

    def track_iteration(self, event: IterationEvent) -> None:
        status = self.runs.setdefault(event.run_id, RunStatus(event.run_id))
        status.iterations += 1
        status.residual_norm = event.residual_norm
        status.damping = event.damping
        self._add_event("iteration", event.run_id, event.to_dict())

    def track_failure(self, event: FailureEvent) -> None:
        status = self.runs.setdefault(event.run_id, RunStatus(event.run_id))
        status.failed = True
        status.reason = event.reason
        if event.run_id not in self.failed_runs:
            self.failed_runs.append(event.run_id)
        self._add_event("failure", event.run_id, event.to_dict())

    def merge(self, events: List[Dict[str, Any]]) -> None:
        """Replay events recorded by another process."""
        for record in events:
            data = dict(record["data"])
            if record["type"] == "iteration":
                self.track_iteration(IterationEvent(**data))
            elif record["type"] == "failure":
                self.track_failure(FailureEvent(**data))

    def get_dashboard(self) -> Dict[str, Any]:
        return {
            "runs": len(self.runs),
            "total_iterations": sum(s.iterations for s in self.runs.values()),
            "failed_runs": self.failed_runs.copy(),
            "status": {run_id: s.to_dict() for run_id, s in self.runs.items()},
            "recent_events": self.events[-20:],
        }

    def format_dashboard(self) -> str:
        lines = [f"{'run':40s} {'iters':>5s} {'|R|':>11s}  status"]
        for run_id, s in self.runs.items():
            state = f"failed ({s.reason})" if s.failed else "ok"
            lines.append(f"{run_id[:40]:40s} {s.iterations:5d} {s.residual_norm:11.3e}  {state}")
        return "\n".join(lines)

    def _add_event(self, event_type: str, run_id: str, data: Dict[str, Any]) -> None:
        self.events.append({
            "type": event_type,
            "run_id": run_id,
            "data": data,
            "timestamp": datetime.now().isoformat(),
        })
        if len(self.events) > self.max_events:
            del self.events[: len(self.events) - self.max_events]
