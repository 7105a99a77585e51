"""Closed sets on the unit circle, complementary arcs and star-like domains.

A star-like domain is the open unit disk together with one open isosceles
triangle erected outside the disk over the chord of every arc complementary
to a finite closed set ``F`` on the circle.  Triangles are parametrized by the
base angle ``phi`` between the chord and each side; the angle between the
circle and a side is then ``theta = phi - |J|/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    """Raised when a set or domain violates its construction constraints."""


def _wrap(t):
    return np.mod(t, TWO_PI)


@dataclass(frozen=True)
class Arc:
    start: float
    length: float

    def __post_init__(self):
        if not 0.0 < self.length < np.pi:
            raise GeometryError(
                f"arc length must lie in (0, pi), got {self.length!r}")

    @property
    def end(self) -> float:
        return self.start + self.length

    def angles(self, fractions) -> np.ndarray:
        return _wrap(self.start + np.asarray(fractions, dtype=float) * self.length)


@dataclass(frozen=True)
class ClosedCircleSet:
    """Finite closed subset of the circle stored as sorted angles in [0, 2pi).

    ``accumulation`` holds the angles that stand in for limit points of an
    infinite family which was truncated by a generator.  They only matter for
    reporting and for pole placement in experiments.
    """

    points: tuple[float, ...]
    accumulation: tuple[float, ...] = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise GeometryError("a closed circle set needs at least 2 points")
        if np.any(pts < 0.0) or np.any(pts >= TWO_PI) or not np.all(np.isfinite(pts)):
            raise GeometryError("angles must be finite and lie in [0, 2pi)")
        if np.any(np.diff(pts) <= 0.0):
            raise GeometryError("angles must be strictly increasing")
        gaps = self.gaps()
        if np.any(gaps >= np.pi):
            worst = int(np.argmax(gaps))
            raise GeometryError(
                f"complementary arc starting at {pts[worst]!r} has length "
                f"{gaps[worst]!r} >= pi")
        missing = [a for a in self.accumulation if a not in self.points]
        if missing:
            raise GeometryError(f"accumulation angles {missing} are not points of the set")

    @classmethod
    def from_angles(cls, angles: Iterable[float],
                    accumulation: Iterable[float] = ()) -> "ClosedCircleSet":
        """Normalize angles modulo 2pi, sort them and drop exact duplicates."""
        pts = np.unique(_wrap(np.asarray(list(angles), dtype=float)))
        acc = np.unique(_wrap(np.asarray(list(accumulation), dtype=float)))
        return cls(tuple(float(a) for a in pts), tuple(float(a) for a in acc))

    @property
    def angles(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def gaps(self) -> np.ndarray:
        pts = np.asarray(self.points, dtype=float)
        return np.diff(np.append(pts, pts[0] + TWO_PI))

    def to_record(self) -> dict:
        return {"angles": list(self.points), "accumulation": list(self.accumulation)}

    @classmethod
    def from_record(cls, record: dict) -> "ClosedCircleSet":
        return cls.from_angles(record["angles"], record.get("accumulation", ()))


def complementary_arcs(cset: ClosedCircleSet) -> list[Arc]:
    """Arcs of the circle minus ``cset``, starting at each point in order."""
    return [Arc(float(s), float(g)) for s, g in zip(cset.points, cset.gaps())]


def chordal_dist(t, cset: ClosedCircleSet):
    """Chordal distance ``min_s |e^{it} - e^{is}|`` from angle(s) ``t`` to the set."""
    t = np.asarray(t, dtype=float)
    diff = t[..., None] - cset.angles
    d = np.min(2.0 * np.abs(np.sin(0.5 * diff)), axis=-1)
    return float(d) if d.ndim == 0 else d


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True)
class Triangle:
    arc: Arc
    base_angle: float

    def __post_init__(self):
        if not self.arc.length / 2 < self.base_angle < np.pi / 2:
            raise GeometryError(
                f"base angle {self.base_angle!r} must lie in (|J|/2, pi/2) "
                f"for an arc of length {self.arc.length!r}")

    @property
    def theta(self) -> float:
        """Angle between the circle and a side (tangent-chord angle removed)."""
        return self.base_angle - self.arc.length / 2

    def vertices(self) -> tuple[complex, complex, complex]:
        half = self.arc.length / 2
        mid = self.arc.start + half
        p1 = complex(np.exp(1j * self.arc.start))
        p2 = complex(np.exp(1j * self.arc.end))
        apex_r = np.cos(half) + np.sin(half) * np.tan(self.base_angle)
        apex = complex(apex_r * np.exp(1j * mid))
        return p1, apex, p2

    def contains(self, z) -> np.ndarray:
        """Open-triangle membership, vectorized over ``z``."""
        z = np.asarray(z, dtype=complex)
        p1, apex, p2 = self.vertices()
        # p1 -> p2 -> apex runs clockwise, so interior points sit right of each edge
        inside = np.ones(z.shape, dtype=bool)
        for a, b in ((p1, p2), (p2, apex), (apex, p1)):
            c = _cross(b.real - a.real, b.imag - a.imag, z.real - a.real, z.imag - a.imag)
            inside &= c < 0.0
        return inside

    def distance(self, w: complex) -> float:
        """Euclidean distance from ``w`` to the closed triangle."""
        if bool(self.contains(w)):
            return 0.0
        verts = self.vertices()
        return min(_segment_distance(w, verts[i], verts[(i + 1) % 3]) for i in range(3))


def _segment_distance(w: complex, a: complex, b: complex) -> float:
    ab = b - a
    s = ((w - a) * ab.conjugate()).real / abs(ab) ** 2
    s = min(1.0, max(0.0, s))
    return abs(w - (a + s * ab))


@dataclass(frozen=True)
class StarDomain:
    set: ClosedCircleSet
    triangles: tuple[Triangle, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(self.triangles) != len(self.set.points):
            raise GeometryError("need exactly one triangle per complementary arc")
        if not self.theta_min > 0.0:
            raise GeometryError("star domain requires a positive minimal side angle")

    @property
    def theta_min(self) -> float:
        return min(tri.theta for tri in self.triangles)

    @property
    def thetas(self) -> np.ndarray:
        return np.array([tri.theta for tri in self.triangles])

    def contains(self, z):
        return contains(self, z)

    def inscribed_constant(self, samples: int = 64) -> float:
        key = ("inscribed", samples)
        if key not in self._cache:
            self._cache[key] = inscribed_constant(self, samples)
        return self._cache[key]

    def boundary_segments(self) -> list[tuple[complex, complex]]:
        """Triangle sides, ordered from the base vertex toward the apex."""
        segs = []
        for tri in self.triangles:
            p1, apex, p2 = tri.vertices()
            segs.append((p1, apex))
            segs.append((p2, apex))
        return segs

    def distance(self, w: complex) -> float:
        """Euclidean distance from ``w`` to the closure of the domain."""
        w = complex(w)
        if bool(contains(self, w)):
            return 0.0
        return min([max(abs(w) - 1.0, 0.0)] + [tri.distance(w) for tri in self.triangles])

    def to_record(self) -> dict:
        return {
            "set": self.set.to_record(),
            "base_angles": [tri.base_angle for tri in self.triangles],
            "thetas": [tri.theta for tri in self.triangles],
            "theta_min": self.theta_min,
        }

    @classmethod
    def from_record(cls, record: dict) -> "StarDomain":
        cset = ClosedCircleSet.from_record(record["set"])
        arcs = complementary_arcs(cset)
        return cls(cset, tuple(Triangle(a, float(phi))
                               for a, phi in zip(arcs, record["base_angles"])))


def build_star_domain(cset: ClosedCircleSet, theta0: float, *,
                      clamp_eps: float = 1e-2, theta_floor: float = 1e-3) -> StarDomain:
    """Erect a triangle with side angle ``theta0`` over every complementary arc.

    When ``theta0 + |J|/2`` reaches ``pi/2`` the base angle is clamped to
    ``pi/2 - clamp_eps`` and that arc gets a smaller effective angle, which
    must stay above ``theta_floor``.
    """
    if not theta0 > 0.0:
        raise GeometryError(f"theta0 must be positive, got {theta0!r}")
    triangles = []
    for arc in complementary_arcs(cset):
        phi = min(theta0 + arc.length / 2, np.pi / 2 - clamp_eps)
        if phi - arc.length / 2 < theta_floor:
            raise GeometryError(
                f"clamping the arc at {arc.start!r} leaves side angle "
                f"{phi - arc.length / 2!r} below the floor {theta_floor!r}")
        triangles.append(Triangle(arc, phi))
    return StarDomain(cset, tuple(triangles))


def contains(domain: StarDomain, z):
    """Membership in the open disk united with the open triangles."""
    z = np.asarray(z, dtype=complex)
    inside = np.abs(z) < 1.0
    for tri in domain.triangles:
        inside |= tri.contains(z)
    return bool(inside) if inside.ndim == 0 else inside


def inscribed_seed(domain: StarDomain) -> float:
    """Crude analytic lower bound for the inscribed-circle constant."""
    return 0.5 * np.sin(domain.theta_min / 2)


# offsets toward each arc endpoint, shared by every sample density so that the
# infimum (reached at the endpoints) is resolved identically
_END_FRACTIONS = 10.0 ** -np.arange(2, 10)


def _arc_fractions(samples: int) -> np.ndarray:
    uniform = np.arange(1, samples + 1) / (samples + 1)
    return np.unique(np.concatenate([uniform, _END_FRACTIONS, 1.0 - _END_FRACTIONS]))


def probe_circle_inside(domain: StarDomain, t, ratio, probes: int = 256) -> np.ndarray:
    """Whether the circle about ``e^{it}`` of radius ``ratio * dist`` stays in the domain.

    Vectorized over ``t`` and ``ratio`` (broadcast together); checked at
    ``probes`` equally spaced points of the circle.
    """
    t, ratio = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(ratio, dtype=float))
    radius = ratio * chordal_dist(t, domain.set)
    psi = np.exp(2j * np.pi * np.arange(probes) / probes)
    pts = np.exp(1j * t)[..., None] + radius[..., None] * psi
    return np.all(contains(domain, pts), axis=-1)


def inscribed_constant(domain: StarDomain, samples: int = 64, *,
                       rtol: float = 1e-4, probes: int = 256) -> float:
    """Largest ``c`` such that circles of radius ``c * dist(e^{it}, F)`` stay in the domain.

    Bisection on ``c`` per sampled angle, membership checked on ``probes``
    points of each circle.  The result is shrunk by ``2 * rtol`` so that it is
    feasible up to the bisection and probing resolution.
    """
    if samples < 64:
        raise ValueError("inscribed_constant needs at least 64 samples per arc")
    fr = _arc_fractions(samples)
    t = np.concatenate([arc.angles(fr) for arc in complementary_arcs(domain.set)])

    lo = np.full(t.shape, inscribed_seed(domain))
    if not np.all(probe_circle_inside(domain, t, lo, probes)):
        raise GeometryError("analytic seed circle leaves the domain; geometry is inconsistent")
    hi = np.ones(t.shape)
    while np.any(hi - lo > rtol * hi):
        mid = 0.5 * (lo + hi)
        ok = probe_circle_inside(domain, t, mid, probes)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    c = float(np.min(lo)) * (1.0 - 2 * rtol)
    if not c > 0.0:
        raise GeometryError("zero inscribed radius for a valid domain")
    return min(c, 1.0)


def vinogradov_contains(r: float, alpha: float, z):
    """Membership in ``{|z| < r, alpha < arg(z - 1) < 2pi - alpha}``."""
    if not r > 1.0 or not 0.0 <= alpha < np.pi / 2:
        raise GeometryError("need r > 1 and 0 <= alpha < pi/2")
    z = np.asarray(z, dtype=complex)
    w = z - 1.0
    arg = _wrap(np.angle(w))
    inside = (np.abs(z) < r) & (w != 0) & (arg > alpha) & (arg < TWO_PI - alpha)
    return bool(inside) if inside.ndim == 0 else inside
