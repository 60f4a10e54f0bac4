"""
Acceptance Cases - the nine acceptance criteria of the plate solver.

Phase 1 are property checks on small meshes, phase 2 the verification
runs, phase 3 the parametric studies (minutes per point at h = 0.05).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class AcceptanceCase:
    """One acceptance criterion."""
    id: int
    name: str
    check: str                      # runner method executing the case
    phase: int
    description: str = ""
    thresholds: Dict[str, Any] = field(default_factory=dict)
    anchors: Dict[str, Any] = field(default_factory=dict)
    overrides: Dict[str, Any] = field(default_factory=dict)
    timeout_seconds: int = 600

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "check": self.check,
            "phase": self.phase,
            "description": self.description,
            "thresholds": self.thresholds,
            "anchors": self.anchors,
            "overrides": self.overrides,
            "timeout_seconds": self.timeout_seconds,
        }


ACCEPTANCE_CASES: List[AcceptanceCase] = [
    AcceptanceCase(
        id=1,
        name="Manufactured solution energies",
        check="check_test1",
        phase=2,
        description="β = 100, h = 0.05, VAR: e_b, e_m, e_c within ±1%",
        thresholds={"percent": 1.0},
        anchors={"e_b": -0.085, "e_m": -0.632, "e_c": -0.426},
        overrides={"beta": 100.0, "mesh_h": 0.05, "variants": ["var"]},
        timeout_seconds=120,
    ),
    AcceptanceCase(
        id=2,
        name="Disclination pair",
        check="check_test2",
        phase=2,
        description="±1 at (±0.2, 0), β = 100: |e_m| ≤ 1% and w ≡ 0 for every variant",
        thresholds={"percent": 1.0, "w_ratio": 1e-8},
        anchors={"e_m": -0.518},
        overrides={"beta": 100.0, "mesh_h": 0.05, "y1": (0.2, 0.0)},
        timeout_seconds=120,
    ),
    AcceptanceCase(
        id=3,
        name="Variant cross-check",
        check="check_variants",
        phase=2,
        description="BNRS17 and CMN18 slices within 1% of VAR for both verification runs",
        thresholds={"relative": 0.01},
        overrides={"beta": 100.0, "mesh_h": 0.05},
        timeout_seconds=600,
    ),
    AcceptanceCase(
        id=4,
        name="Aspect-ratio sweep",
        check="check_beta_sweep",
        phase=3,
        description="γβ⁴ = 1, s = −1 at the origin: E_m slope 4.00 ± 0.05, E_m/(β⁴/32π) in [0.95, 1.05]",
        thresholds={"slope": 4.0, "slope_tol": 0.05, "ratio": (0.95, 1.05)},
        overrides={"mesh_h": 0.05, "sweep_values": [10.0, 17.0, 31.0, 56.0, 100.0]},
        timeout_seconds=3600,
    ),
    AcceptanceCase(
        id=5,
        name="Load sweep",
        check="check_gamma_sweep",
        phase=3,
        description="β = 20: E_b slope 2.00 ± 0.05, E_m flat within 2%",
        thresholds={"slope": 2.0, "slope_tol": 0.05, "flatness": 0.02},
        anchors={"v_change": 0.025},
        overrides={"beta": 20.0, "mesh_h": 0.05},
        timeout_seconds=3600,
    ),
    AcceptanceCase(
        id=6,
        name="Variational consistency",
        check="check_variational",
        phase=1,
        description="R = ∇I by central differences, J = ∇R, VAR Jacobian symmetric",
        thresholds={"gradient": 1e-6, "jacobian": 1e-5, "symmetry": 1e-9},
        overrides={"mesh_h": 0.25, "states": 10, "seed": 0},
        timeout_seconds=300,
    ),
    AcceptanceCase(
        id=7,
        name="Bracket identity",
        check="check_bracket_identity",
        phase=1,
        description="the three bracket integrals of φ = (1−r²)², χ = ξ₁², η = ξ₂² agree within 0.1%",
        thresholds={"relative": 1e-3},
        overrides={"mesh_h": 0.05},
        timeout_seconds=120,
    ),
    AcceptanceCase(
        id=8,
        name="Zero mean Gaussian curvature",
        check="check_mean_curvature",
        phase=3,
        description="|∫[w,w]| ≤ 1e-3 ∫|[w,w]| for every disclination preset",
        thresholds={"ratio": 1e-3},
        overrides={"mesh_h": 0.02},
        timeout_seconds=3600,
    ),
    AcceptanceCase(
        id=9,
        name="Mesh refinement",
        check="check_convergence",
        phase=2,
        description="|e_m| of the manufactured solution decreases over h = 0.1, 0.05, 0.025",
        overrides={"beta": 100.0, "mesh_sizes": [0.1, 0.05, 0.025]},
        timeout_seconds=1800,
    ),
]


ACCEPTANCE_CONFIG: Dict[str, Any] = {
    "results_dir": "results/acceptance",
    "workers": 1,
}


def get_cases_by_phase(phase: int) -> List[AcceptanceCase]:
    return [case for case in ACCEPTANCE_CASES if case.phase == phase]


def get_case_by_id(case_id: int) -> Optional[AcceptanceCase]:
    for case in ACCEPTANCE_CASES:
        if case.id == case_id:
            return case
    return None
