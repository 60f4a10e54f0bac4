"""
Disclination arrangements used by the parametric studies.
"""

from typing import Dict, List

from ..errors import ParameterError
from ..models.problem import DisclinationSet

# Four sites on the circle |y| = 1/2.
PRESET_SITES = ((0.5, 0.0), (0.0, 0.5), (-0.5, 0.0), (0.0, -0.5))


def single_disclination(angle: float = -1.0) -> DisclinationSet:
    """One disclination at the origin (β- and γ-sweeps use s = −1)."""
    return DisclinationSet(positions=((0.0, 0.0),), angles=(angle,), label="single")


def multi_disclination_presets() -> List[DisclinationSet]:
    """four-negative, four-positive, flower and inverted-flower, in that order."""
    flower = DisclinationSet(
        positions=((0.0, 0.0),) + PRESET_SITES,
        angles=(1.0, -0.25, -0.25, -0.25, -0.25),
        label="flower",
    )
    return [
        DisclinationSet(positions=PRESET_SITES, angles=(-0.5,) * 4, label="four-negative"),
        DisclinationSet(positions=PRESET_SITES, angles=(0.5,) * 4, label="four-positive"),
        flower,
        DisclinationSet(flower.positions, tuple(-s for s in flower.angles), label="inverted-flower"),
    ]


def preset_by_name() -> Dict[str, DisclinationSet]:
    return {preset.label: preset for preset in multi_disclination_presets()}


def get_preset(name: str) -> DisclinationSet:
    presets = preset_by_name()
    if name not in presets:
        raise ParameterError(f"unknown disclination preset {name!r}; expected one of {sorted(presets)}")
    return presets[name]
