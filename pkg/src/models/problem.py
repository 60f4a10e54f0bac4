"""
Plate problem models.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from ..errors import ParameterError

logger = logging.getLogger(__name__)

# Frank angles used throughout the parametric studies.
CHARACTERISTIC_ANGLES = (-1.0, -0.5, 0.5, 1.0)

LoadFunction = Callable[[np.ndarray], np.ndarray]


class FormulationVariant(Enum):
    """Discrete weak forms of the coupled system."""
    VAR = "var"          # Euler-Lagrange equations of the penalized functional
    BNRS17 = "bnrs17"    # bracket cell terms + bracket edge corrections
    CMN18 = "cmn18"      # bracket cell terms, no edge coupling

    @classmethod
    def parse(cls, value) -> "FormulationVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(
                f"unsupported variant {value!r}; expected one of {[v.value for v in cls]}"
            ) from None


@dataclass(frozen=True)
class DisclinationSet:
    """Wedge disclinations θ = Σ s_i δ(ξ - y_i)."""
    positions: Tuple[Tuple[float, float], ...] = ()
    angles: Tuple[float, ...] = ()
    label: str = "custom"

    def __post_init__(self):
        positions = tuple((float(p[0]), float(p[1])) for p in self.positions)
        angles = tuple(float(s) for s in self.angles)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "angles", angles)
        if len(positions) != len(angles):
            raise ParameterError("each disclination needs exactly one Frank angle")
        for y, s in zip(positions, angles):
            if np.hypot(*y) >= 1.0:
                raise ParameterError(f"disclination at {y} is not strictly inside the unit disc")
            if s == 0.0:
                raise ParameterError(f"disclination at {y} has zero Frank angle")
        if angles and not self.uses_characteristic_angles:
            logger.info("disclination set %r uses non-characteristic Frank angles %s", self.label, angles)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Sequence[float], float]], label: str = "custom") -> "DisclinationSet":
        """Build from ``[((x, y), s), ...]``."""
        return cls(
            positions=tuple(tuple(p) for p, _ in pairs),
            angles=tuple(s for _, s in pairs),
            label=label,
        )

    def __len__(self) -> int:
        return len(self.angles)

    @property
    def points(self) -> np.ndarray:
        return np.array(self.positions, dtype=float).reshape(-1, 2)

    @property
    def total_angle(self) -> float:
        return float(sum(self.angles))

    @property
    def uses_characteristic_angles(self) -> bool:
        return all(any(np.isclose(s, c) for c in CHARACTERISTIC_ANGLES) for s in self.angles)

    def scaled(self, factor: float) -> "DisclinationSet":
        """Same positions with every angle multiplied by ``factor``."""
        return DisclinationSet(self.positions, tuple(factor * s for s in self.angles), self.label)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "positions": [list(p) for p in self.positions],
            "angles": list(self.angles),
            "total_angle": self.total_angle,
        }


@dataclass
class PlateProblem:
    """
    Non-dimensional clamped plate.

    The transverse load enters the w-equation as γβ⁴·p and the
    disclinations enter the v-equation as β²·θ.
    """
    beta: float
    gamma: float
    nu: float = 0.15
    alpha: float = 300.0
    variant: FormulationVariant = FormulationVariant.VAR
    load: Optional[LoadFunction] = None
    disclinations: DisclinationSet = field(default_factory=DisclinationSet)
    load_label: str = "zero"

    def __post_init__(self):
        self.variant = FormulationVariant.parse(self.variant)
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not self.alpha > 0:
            raise ParameterError(f"penalty alpha must be positive, got {self.alpha}")
        if not -1.0 < self.nu < 0.5:
            raise ParameterError(f"Poisson ratio must lie in (-1, 1/2), got {self.nu}")
        if not np.isfinite(self.gamma):
            raise ParameterError(f"gamma must be finite, got {self.gamma}")

    @property
    def c_nu(self) -> float:
        """Dimensionless bending stiffness 1/(12(1-ν²))."""
        return 1.0 / (12.0 * (1.0 - self.nu ** 2))

    @property
    def load_factor(self) -> float:
        """γβ⁴."""
        return self.gamma * self.beta ** 4

    @property
    def source_factor(self) -> float:
        """β²."""
        return self.beta ** 2

    def evaluate_load(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.load is None:
            return np.zeros(points.shape[:-1])
        return np.broadcast_to(np.asarray(self.load(points), dtype=float), points.shape[:-1])

    def with_params(self, **changes) -> "PlateProblem":
        """Copy with some fields replaced (used by sweeps and continuation)."""
        data = {
            "beta": self.beta, "gamma": self.gamma, "nu": self.nu, "alpha": self.alpha,
            "variant": self.variant, "load": self.load,
            "disclinations": self.disclinations, "load_label": self.load_label,
        }
        data.update(changes)
        return PlateProblem(**data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "gamma": self.gamma,
            "nu": self.nu,
            "c_nu": self.c_nu,
            "alpha": self.alpha,
            "variant": self.variant.value,
            "load": self.load_label,
            "load_factor": self.load_factor,
            "disclinations": self.disclinations.to_dict(),
        }


def uniform_load(value: float) -> LoadFunction:
    """p(ξ) = value."""
    def load(points: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(points).shape[:-1], float(value))
    return load
