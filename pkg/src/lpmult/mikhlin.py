"""Derivative bounds for boundary functions on star-like domains.

For ``m`` bounded on a star-like domain, the circle about ``e^{it}`` of radius
``c * dist(e^{it}, F)`` lies in the domain, so the Cauchy estimate gives

    |(m*)'(t)| * dist(e^{it}, F) <= ||m||_inf / c.

``mikhlin_constant`` measures the left side on a grid and reports it against
the right side as ``margin``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic_models import (AnalyticModel, NotBoundedError, PoleError, is_bounded_on,
                              offending_singularities, sup_norm_estimate)
from .circle_geometry import StarDomain, chordal_dist


@dataclass(frozen=True)
class MikhlinReport:
    sup_product: float
    bound: float
    grid: int
    margin: float
    sup_norm: float
    inscribed_constant: float
    argmax_angle: float

    def to_record(self) -> dict:
        return {
            "sup_product": self.sup_product,
            "bound": self.bound,
            "grid": self.grid,
            "margin": self.margin,
            "sup_norm": self.sup_norm,
            "inscribed_constant": self.inscribed_constant,
            "argmax_angle": self.argmax_angle,
        }


def boundary_derivative(m: AnalyticModel, t):
    """Derivative in ``t`` of ``m(e^{it})``, i.e. ``i e^{it} m'(e^{it})``."""
    z = np.exp(1j * np.asarray(t, dtype=float))
    sing = m.singularities()
    if sing.size and np.any(np.isclose(np.asarray(z)[..., None], sing, rtol=0, atol=1e-15)):
        raise PoleError("boundary point coincides with a singularity of the model")
    d = 1j * z * m.derivative(z)
    return complex(d) if np.ndim(d) == 0 else d


def cauchy_derivative(m: AnalyticModel, t: float, radius: float, Q: int = 64) -> complex:
    """``m'(e^{it})`` by the trapezoidal rule on the Cauchy integral over a circle.

    The rule is spectrally accurate: the error decays like
    ``(radius / distance to nearest singularity)^Q``.
    """
    if Q < 4:
        raise ValueError("Q must be at least 4")
    if radius <= 0:
        raise ValueError("radius must be positive")
    z0 = complex(np.exp(1j * t))
    sing = m.singularities()
    if sing.size:
        nearest = float(np.min(np.abs(sing - z0)))
        if radius >= nearest:
            raise ValueError(
                f"radius {radius!r} reaches a singularity at distance {nearest!r}")
    omega = np.exp(2j * np.pi * np.arange(Q) / Q)
    vals = m(z0 + radius * omega)
    return complex(np.sum(vals / omega) / (Q * radius))


def grid_angles(domain: StarDomain, grid: int, guard: float = 1e-9) -> np.ndarray:
    """``2 pi j / grid`` minus a guard band of half-width ``guard`` around the set."""
    t = 2 * np.pi * np.arange(grid) / grid
    diff = np.abs(np.angle(np.exp(1j * (t[:, None] - domain.set.angles[None, :]))))
    return t[np.all(diff > guard, axis=1)]


def mikhlin_constant(m: AnalyticModel, domain: StarDomain, grid: int = 20000, *,
                     sup_grid: int = 8192, samples: int = 64,
                     guard: float = 1e-9) -> MikhlinReport:
    """Compare ``sup |(m*)'| dist`` with ``||m|| / c`` on the domain."""
    if grid < 1024:
        raise ValueError("grid must be at least 1024")
    if not is_bounded_on(m, domain):
        bad = offending_singularities(m, domain)
        raise NotBoundedError(f"model is not bounded on the domain; offending points {bad}")
    t = grid_angles(domain, grid, guard)
    prod = np.abs(boundary_derivative(m, t)) * chordal_dist(t, domain.set)
    k = int(np.argmax(prod))
    sup_product = float(prod[k])
    sup_norm = sup_norm_estimate(m, domain, sup_grid).value
    c = domain.inscribed_constant(samples)
    bound = sup_norm / c
    margin = sup_product / bound if bound > 0 else 0.0
    return MikhlinReport(sup_product, bound, grid, margin, sup_norm, c, float(t[k]))
