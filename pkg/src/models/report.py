"""
Result records - energies, error percentages, line profiles, solver reports.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


@dataclass
class EnergyBreakdown:
    """
    Energy terms of a plate state.

    membrane = ½Σ∫|∇²v|², bending = (c_ν/2)Σ∫|∇²w|²,
    coupling = ½Σ∫cof(∇²v):(∇w⊗∇w), dirac_work = β²Σ s_i v(y_i),
    pressure_work = γβ⁴∫p w. ``coupling_bracket`` is the same coupling
    written as -½Σ∫[w,w]v.
    """
    membrane: float = 0.0
    bending: float = 0.0
    coupling: float = 0.0
    dirac_work: float = 0.0
    pressure_work: float = 0.0
    coupling_bracket: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "membrane": self.membrane,
            "bending": self.bending,
            "coupling": self.coupling,
            "dirac_work": self.dirac_work,
            "pressure_work": self.pressure_work,
            "coupling_bracket": self.coupling_bracket,
        }


@dataclass
class EnergyErrors:
    """Percentage errors 100·(E - E_exact)/E_exact; ``None`` when undefined."""
    bending: Optional[float] = None
    membrane: Optional[float] = None
    coupling: Optional[float] = None
    undefined: List[str] = field(default_factory=list)

    def within(self, threshold: float, terms: Optional[List[str]] = None) -> bool:
        """True if every requested, defined percentage is within ±threshold."""
        terms = terms or ["bending", "membrane", "coupling"]
        for name in terms:
            value = getattr(self, name)
            if value is None:
                if name not in self.undefined:
                    return False
                continue
            if abs(value) > threshold:
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "e_b": self.bending,
            "e_m": self.membrane,
            "e_c": self.coupling,
            "undefined": list(self.undefined),
        }


@dataclass
class Profile:
    """Samples of a field along ξ₂ = 0."""
    abscissae: np.ndarray
    values: np.ndarray
    normalization: float = 1.0
    normalized: bool = False
    normalization_skipped: bool = False
    name: str = ""

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0

    def scaled(self, factor: float) -> "Profile":
        return Profile(self.abscissae, self.values * factor, self.normalization / factor,
                       self.normalized, self.normalization_skipped, self.name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n_samples": int(len(self.abscissae)),
            "normalization": self.normalization,
            "normalized": self.normalized,
            "normalization_skipped": self.normalization_skipped,
        }


@dataclass
class SolverReport:
    """
    Outcome of a Newton (or continuation) solve.

    ``residual_history`` holds ‖R‖ before the first step and after every
    accepted step, so its length is ``iterations + 1``.
    ``stop_criterion`` names the test that ended a converged solve:
    ``residual`` (tolerance met), ``step`` (negligible Newton update) or
    ``roundoff`` (‖R‖ at the floating-point floor ``residual_floor``).
    """
    iterations: int = 0
    residual_history: List[float] = field(default_factory=list)
    converged: bool = False
    step_norms: List[float] = field(default_factory=list)
    damping_history: List[float] = field(default_factory=list)
    reason: Optional[str] = None
    singular_pivot: Optional[int] = None
    continuation_steps: int = 0
    stop_criterion: Optional[str] = None
    residual_floor: float = 0.0

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else float("nan")

    @property
    def final_step_norm(self) -> float:
        return self.step_norms[-1] if self.step_norms else 0.0

    def merge(self, other: "SolverReport") -> "SolverReport":
        """Concatenate a later solve (used by continuation)."""
        history = self.residual_history + other.residual_history[1:] if self.residual_history else list(other.residual_history)
        return SolverReport(
            iterations=self.iterations + other.iterations,
            residual_history=history,
            converged=other.converged,
            step_norms=self.step_norms + other.step_norms,
            damping_history=self.damping_history + other.damping_history,
            reason=other.reason,
            singular_pivot=other.singular_pivot,
            continuation_steps=self.continuation_steps + other.continuation_steps,
            stop_criterion=other.stop_criterion,
            residual_floor=other.residual_floor,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "reason": self.reason,
            "final_residual": self.final_residual,
            "final_step_norm": self.final_step_norm,
            "residual_history": list(self.residual_history),
            "damping_history": list(self.damping_history),
            "singular_pivot": self.singular_pivot,
            "continuation_steps": self.continuation_steps,
            "stop_criterion": self.stop_criterion,
            "residual_floor": self.residual_floor,
        }
