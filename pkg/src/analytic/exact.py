"""
Closed-form references on the unit disc.

Radial solutions are carried as ``numpy.polynomial.Polynomial`` objects in r,
so their energies integrate exactly; point evaluation goes through r² to
stay regular at the origin.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from ..errors import ParameterError
from ..models.problem import DisclinationSet
from ..models.report import EnergyBreakdown

ScalarFunction = Callable[[np.ndarray], np.ndarray]

_R = Polynomial([0.0, 1.0])
_ONE_MINUS_R2 = Polynomial([1.0, 0.0, -1.0])


def c_nu_of(nu: float) -> float:
    if not -1.0 < nu < 0.5:
        raise ParameterError(f"Poisson ratio must lie in (-1, 1/2), got {nu}")
    return 1.0 / (12.0 * (1.0 - nu ** 2))


def _as_points(xi) -> np.ndarray:
    return np.asarray(xi, dtype=float).reshape(-1, 2)


def green_disc(xi, y) -> np.ndarray:
    """
    Clamped biharmonic Green's function of the unit disc, Δ²𝒢(·; y) = δ_y.

    ``xi`` may be one point or an (n, 2) array. At ξ = y the logarithmic
    term takes its limit 0.
    """
    y = np.asarray(y, dtype=float)
    points = _as_points(xi)
    diff2 = np.sum((points - y) ** 2, axis=1)
    xi2 = np.sum(points ** 2, axis=1)
    y2 = float(y @ y)
    denom = xi2 * y2 - 2.0 * points @ y + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(diff2 > 0.0, diff2 * np.log(np.where(diff2 > 0.0, diff2, 1.0) / denom), 0.0)
    values = ((1.0 - xi2) * (1.0 - y2) + log_term) / (16.0 * np.pi)
    return values if np.ndim(xi) > 1 else float(values[0])


def _radial(poly: Polynomial) -> ScalarFunction:
    """Evaluate a radial polynomial at Cartesian points, through r² when it is even."""
    coef = poly.coef
    even = np.allclose(coef[1::2], 0.0)

    def evaluate(points: np.ndarray) -> np.ndarray:
        points = _as_points(points)
        r2 = np.sum(points ** 2, axis=1)
        if even:
            return np.polynomial.polynomial.polyval(r2, coef[0::2])
        return poly(np.sqrt(r2))

    return evaluate


def _over_r(poly: Polynomial) -> Polynomial:
    """f'(r)/r for an even radial polynomial f."""
    quotient, remainder = divmod(poly.deriv(), _R)
    if np.any(np.abs(remainder.coef) > 1e-14 * max(1.0, np.abs(poly.coef).max())):
        raise ParameterError("radial profile is not even in r")
    return quotient


def _disc_integral(integrand: Polynomial) -> float:
    """∫_Ω f dξ = 2π ∫₀¹ f(r) r dr."""
    antiderivative = (integrand * _R).integ()
    return float(2.0 * np.pi * (antiderivative(1.0) - antiderivative(0.0)))


def _hessian_norm2(poly: Polynomial) -> Polynomial:
    return poly.deriv(2) ** 2 + _over_r(poly) ** 2


def radial_laplacian(poly: Polynomial) -> Polynomial:
    """Δf = f'' + f'/r."""
    return poly.deriv(2) + _over_r(poly)


def radial_bracket(f: Polynomial, g: Polynomial) -> Polynomial:
    """[f, g] = f''·g'/r + g''·f'/r for radial f, g."""
    return f.deriv(2) * _over_r(g) + g.deriv(2) * _over_r(f)


@dataclass
class ExactSolution:
    """A closed-form (w*, v*) pair with its load and sources."""
    name: str
    w: ScalarFunction
    v: ScalarFunction
    load: ScalarFunction
    disclinations: DisclinationSet = field(default_factory=DisclinationSet)
    load_factor: float = 0.0          # γβ⁴ the pair was built for
    energies: Optional[EnergyBreakdown] = None
    radial: Optional[Dict[str, Polynomial]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "disclinations": self.disclinations.to_dict(),
            "load_factor": self.load_factor,
            "energies": self.energies.to_dict() if self.energies else None,
        }


def test1_profiles(nu: float = 0.15) -> Dict[str, Polynomial]:
    """Radial polynomials w*(r), v*(r), p(r) of the compatible plate under pressure."""
    c = c_nu_of(nu)
    s = _ONE_MINUS_R2
    return {
        "w": np.sqrt(2.0 * c) * s ** 2,
        "v": c * (-(s ** 2) / 12.0 - (s ** 3) / 18.0 - (s ** 4) / 24.0),
        "p": np.sqrt(2.0 * c ** 3) * (40.0 / 3.0 * s ** 4 + 16.0 / 3.0 * (11.0 + _R ** 2)),
    }


def test1_exact(nu: float = 0.15) -> ExactSolution:
    """
    Manufactured solution without disclinations.

    The load p is stated for γβ⁴ = 1, which is the prefactor the
    harness runs this case with.
    """
    c = c_nu_of(nu)
    profiles = test1_profiles(nu)
    w, v, p = profiles["w"], profiles["v"], profiles["p"]
    energies = EnergyBreakdown(
        membrane=0.5 * _disc_integral(_hessian_norm2(v)),
        bending=0.5 * c * _disc_integral(_hessian_norm2(w)),
        coupling=0.5 * _disc_integral(_over_r(v) * w.deriv() ** 2),
        dirac_work=0.0,
        pressure_work=_disc_integral(p * w),
        coupling_bracket=-0.5 * _disc_integral(radial_bracket(w, w) * v),
    )
    return ExactSolution(
        name="test1",
        w=_radial(w),
        v=_radial(v),
        load=_radial(p),
        load_factor=1.0,
        energies=energies,
        radial=profiles,
    )


def manufactured_defects(nu: float = 0.15, radii: Optional[Sequence[float]] = None) -> Dict[str, np.ndarray]:
    """
    Pointwise defects of the Test-1 pair in the strong equations

        Δ²v + ½[w,w] = 0,    c_νΔ²w − [v,w] − p = 0.
    """
    c = c_nu_of(nu)
    profiles = test1_profiles(nu)
    w, v, p = profiles["w"], profiles["v"], profiles["p"]
    radii = np.linspace(0.0, 1.0, 101) if radii is None else np.asarray(radii, dtype=float)
    membrane = radial_laplacian(radial_laplacian(v)) + 0.5 * radial_bracket(w, w)
    bending = c * radial_laplacian(radial_laplacian(w)) - radial_bracket(v, w) - p
    return {"radii": radii, "membrane": membrane(radii), "bending": bending(radii)}


def test2_exact(beta: float, y1=(0.2, 0.0)) -> ExactSolution:
    """Disclination pair s = +1 at y1 and s = −1 at −y1 with w* = 0 and p = 0."""
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    y1 = np.asarray(y1, dtype=float)
    if not np.hypot(*y1) < 1.0:
        raise ParameterError(f"y1 must lie strictly inside the unit disc, got {tuple(y1)}")
    b2 = beta ** 2

    def v(points):
        return b2 * (green_disc(_as_points(points), y1) - green_disc(_as_points(points), -y1))

    def zero(points):
        return np.zeros(len(_as_points(points)))

    membrane = beta ** 4 * (green_disc(y1, y1) - green_disc(y1, -y1))
    disclinations = DisclinationSet(positions=(tuple(y1), tuple(-y1)), angles=(1.0, -1.0), label="test2")
    return ExactSolution(
        name="test2",
        w=zero,
        v=v,
        load=zero,
        disclinations=disclinations,
        load_factor=0.0,
        energies=EnergyBreakdown(
            membrane=float(membrane),
            bending=0.0,
            coupling=0.0,
            dirac_work=float(2.0 * membrane),
            pressure_work=0.0,
            coupling_bracket=0.0,
        ),
    )


def kl_membrane_energy(beta: float) -> float:
    """Membrane energy of Δ²v = −β²δ₀: β⁴/(32π)."""
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    return beta ** 4 / (32.0 * np.pi)


def kl_bending_energy(gamma: float, beta: float, c_nu: float) -> float:
    """Bending energy of c_νΔ²w = −γβ⁴: π(γβ⁴)²/(384 c_ν)."""
    if not beta > 0 or not c_nu > 0:
        raise ParameterError("beta and c_nu must be positive")
    return np.pi * (gamma * beta ** 4) ** 2 / (384.0 * c_nu)


def kl_membrane_solution(beta: float, angle: float = -1.0) -> ScalarFunction:
    """v̂ = sβ²𝒢(ξ; 0) for a single disclination at the origin."""
    return lambda points: angle * beta ** 2 * green_disc(_as_points(points), np.zeros(2))


def kl_bending_solution(load_factor: float, c_nu: float) -> ScalarFunction:
    """ŵ = −γβ⁴(1 − r²)²/(64 c_ν) for the uniform load p = −1."""
    return _radial(-load_factor / (64.0 * c_nu) * _ONE_MINUS_R2 ** 2)


# Smooth functions with value, gradient and Hessian, for quadrature checks.
SmoothFunction = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


def _bump(points: np.ndarray):
    x, y = points[..., 0], points[..., 1]
    s = 1.0 - x ** 2 - y ** 2
    grad = np.stack([-4.0 * x * s, -4.0 * y * s], axis=-1)
    hess = np.empty(points.shape[:-1] + (2, 2))
    hess[..., 0, 0] = -4.0 * s + 8.0 * x ** 2
    hess[..., 1, 1] = -4.0 * s + 8.0 * y ** 2
    hess[..., 0, 1] = hess[..., 1, 0] = 8.0 * x * y
    return s ** 2, grad, hess


def _square(axis: int) -> SmoothFunction:
    def evaluate(points: np.ndarray):
        t = points[..., axis]
        grad = np.zeros(points.shape)
        grad[..., axis] = 2.0 * t
        hess = np.zeros(points.shape[:-1] + (2, 2))
        hess[..., axis, axis] = 2.0
        return t ** 2, grad, hess
    return evaluate


def bracket_test_functions() -> Dict[str, SmoothFunction]:
    """φ = (1 − r²)², χ = ξ₁², η = ξ₂²; every bracket integral equals −4π/3."""
    return {"phi": _bump, "chi": _square(0), "eta": _square(1)}
