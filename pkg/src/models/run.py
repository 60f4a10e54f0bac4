"""
Run models - experiment kinds, solver settings and the run configuration.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..config import get_newton_config
from ..errors import ConfigError, ParameterError
from .problem import FormulationVariant


class ExperimentKind(Enum):
    """Experiments the driver knows how to run."""
    VERIFY_TEST1 = "verify-test1"   # manufactured solution under pressure
    VERIFY_TEST2 = "verify-test2"   # opposite disclination pair
    SWEEP_BETA = "sweep-beta"       # aspect-ratio study, γβ⁴ = 1
    SWEEP_GAMMA = "sweep-gamma"     # load study at fixed β
    DISCLINATIONS = "disclinations" # multi-disclination presets
    CUSTOM = "custom"               # single solve from explicit parameters


@dataclass
class SolverConfig:
    """Damped Newton settings."""
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_iters: int = 50
    initial_damping: float = 1.0
    backtrack_factor: float = 0.5
    max_halvings: int = 20
    step_tol: float = 1e-12                 # ‖δx‖ ≤ step_tol·(1 + ‖x‖) counts as converged
    roundoff_factor: float = 100.0          # multiple of ε·(‖|J||x|‖ + ‖b‖) treated as zero residual
    continuation_steps: int = 1
    continuation_parameter: str = "gamma"   # gamma or beta

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.step_tol > 0):
            raise ParameterError("solver tolerances must be positive")
        if self.roundoff_factor < 1:
            raise ParameterError("roundoff_factor must be at least 1")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")
        if not 0 < self.initial_damping <= 1:
            raise ParameterError("initial_damping must lie in (0, 1]")
        if not 0 < self.backtrack_factor < 1:
            raise ParameterError("backtrack_factor must lie in (0, 1)")
        if self.continuation_steps < 1:
            raise ParameterError("continuation_steps must be at least 1")
        if self.continuation_parameter not in ("gamma", "beta"):
            raise ParameterError(f"cannot ramp {self.continuation_parameter!r}")

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        settings = get_newton_config()
        settings.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**settings)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_iters": self.max_iters,
            "initial_damping": self.initial_damping,
            "backtrack_factor": self.backtrack_factor,
            "max_halvings": self.max_halvings,
            "step_tol": self.step_tol,
            "roundoff_factor": self.roundoff_factor,
            "continuation_steps": self.continuation_steps,
            "continuation_parameter": self.continuation_parameter,
        }


# Values used when neither the run file nor the command line sets them.
EXPERIMENT_DEFAULTS: Dict[ExperimentKind, Dict[str, Any]] = {
    ExperimentKind.VERIFY_TEST1: {"beta": 100.0, "mesh_h": 0.05},
    ExperimentKind.VERIFY_TEST2: {"beta": 100.0, "mesh_h": 0.05, "y1": (0.2, 0.0)},
    ExperimentKind.SWEEP_BETA: {
        "mesh_h": 0.05, "load": -1.0,
        "sweep_values": [10.0, 17.0, 31.0, 56.0, 100.0],
    },
    ExperimentKind.SWEEP_GAMMA: {
        "beta": 20.0, "mesh_h": 0.05, "load": -1.0,
        "sweep_values": [6.25e-7, 6.25e-6, 6.25e-5, 6.25e-4, 2e-3],
    },
    ExperimentKind.DISCLINATIONS: {
        "beta": 20.0, "gamma": 5e-8, "mesh_h": 0.02, "load": -1.0,
        "presets": ["four-negative", "four-positive", "flower", "inverted-flower"],
    },
    ExperimentKind.CUSTOM: {"beta": 10.0, "gamma": 1e-4, "mesh_h": 0.05},
}


@dataclass
class RunConfig:
    """
    Fully merged configuration of one experiment run.

    The mesh comes either from the generator (``mesh_h``) or from an MSH
    file (``mesh_path``); the file wins when both are set.
    """
    kind: ExperimentKind
    mesh_h: float = 0.05
    mesh_path: Optional[Path] = None
    beta: float = 100.0
    gamma: Optional[float] = None          # None: derived from γβ⁴ = 1
    nu: float = 0.15
    alpha: float = 300.0
    variants: List[FormulationVariant] = field(default_factory=lambda: list(FormulationVariant))
    load: float = 0.0                      # uniform p for sweeps/custom runs
    disclinations: List[Tuple[Tuple[float, float], float]] = field(default_factory=list)
    presets: List[str] = field(default_factory=list)
    y1: Tuple[float, float] = (0.2, 0.0)
    sweep_values: List[float] = field(default_factory=list)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_dir: Path = Path("results")
    workers: int = 1
    n_profile_samples: int = 401
    heatmap_resolution: int = 201

    def __post_init__(self):
        self.kind = ExperimentKind(self.kind)
        self.variants = [FormulationVariant.parse(v) for v in self.variants]
        self.output_dir = Path(self.output_dir)
        if self.mesh_path is not None:
            self.mesh_path = Path(self.mesh_path)
        if not self.variants:
            raise ConfigError("at least one formulation variant is required")
        if self.mesh_path is None and not 0 < self.mesh_h < 1:
            raise ConfigError(f"mesh_h must lie in (0, 1), got {self.mesh_h}")
        if not self.beta > 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if not -1.0 < self.nu < 0.5:
            raise ConfigError(f"nu must lie in (-1, 1/2), got {self.nu}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.n_profile_samples < 2:
            raise ConfigError("profiles need at least two samples")
        if self.kind in (ExperimentKind.SWEEP_BETA, ExperimentKind.SWEEP_GAMMA):
            values = self.sweep_values
            if not values:
                raise ConfigError(f"{self.kind.value} needs a non-empty sweep list")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ConfigError(f"{self.kind.value} sweep values must be strictly increasing")
            if any(v <= 0 for v in values):
                raise ConfigError("sweep values must be positive")

    @property
    def load_factor(self) -> float:
        """γβ⁴ actually used (1 when γ is left unset)."""
        if self.gamma is None:
            return 1.0
        return self.gamma * self.beta ** 4

    def resolved_gamma(self, beta: Optional[float] = None) -> float:
        beta = self.beta if beta is None else beta
        if self.gamma is None:
            return beta ** -4
        return self.gamma

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "mesh_h": self.mesh_h,
            "mesh_path": str(self.mesh_path) if self.mesh_path else None,
            "beta": self.beta,
            "gamma": self.gamma,
            "nu": self.nu,
            "alpha": self.alpha,
            "variants": [v.value for v in self.variants],
            "load": self.load,
            "disclinations": [[list(p), s] for p, s in self.disclinations],
            "presets": list(self.presets),
            "y1": list(self.y1),
            "sweep_values": list(self.sweep_values),
            "solver": self.solver.to_dict(),
            "output_dir": str(self.output_dir),
            "workers": self.workers,
            "n_profile_samples": self.n_profile_samples,
            "heatmap_resolution": self.heatmap_resolution,
        }
