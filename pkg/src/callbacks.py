"""
Callback definitions for solver-to-monitor communication.
"""

from typing import Callable, Dict, Any, Optional, List
from dataclasses import dataclass


# Callback type aliases
IterationCallback = Callable[["IterationEvent"], None]
FailureCallback = Callable[["FailureEvent"], None]


@dataclass
class IterationEvent:
    """One Newton iteration."""
    run_id: str
    iteration: int
    residual_norm: float
    step_norm: float = 0.0
    damping: float = 1.0          # accepted step fraction
    stage: str = "newton"         # newton, continuation
    message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "iteration": self.iteration,
            "residual_norm": self.residual_norm,
            "step_norm": self.step_norm,
            "damping": self.damping,
            "stage": self.stage,
            "message": self.message,
        }


@dataclass
class FailureEvent:
    """Solver stopped without converging."""
    run_id: str
    reason: str               # singular_jacobian, max_iters, line_search
    iterations: int
    residual_history: Optional[List[float]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "reason": self.reason,
            "iterations": self.iterations,
            "residual_history": self.residual_history,
        }
