"""Closed-form analytic functions: evaluation, derivatives and sup-norm estimates.

Models are immutable and vectorized over numpy arrays of complex points.
Blaschke factors use the convention ``(z - a) / (1 - conj(a) z)`` without a
unimodular prefactor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .circle_geometry import StarDomain, vinogradov_contains


class PoleError(ValueError):
    """Evaluation requested at a singular point of the model."""


class NotBoundedError(ValueError):
    """The model is not bounded and analytic on the requested region."""


def _as_complex_tuple(values) -> tuple[complex, ...]:
    return tuple(complex(v) for v in np.asarray(values, dtype=complex).ravel())


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _unpair(items) -> list[complex]:
    out = []
    for item in items:
        if isinstance(item, (list, tuple)):
            if len(item) != 2:
                raise ValueError(f"complex numbers are [re, im] pairs, got {item!r}")
            out.append(complex(float(item[0]), float(item[1])))
        else:
            out.append(complex(float(item)))
    return out


def _scalar_or_array(value, like):
    return complex(value) if np.ndim(like) == 0 else value


class AnalyticModel:
    """Base class; subclasses implement ``_eval``, ``_deriv`` and ``singularities``."""

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return _scalar_or_array(self._eval(z), z)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return _scalar_or_array(self._deriv(z), z)

    def singularities(self) -> np.ndarray:
        return np.empty(0, dtype=complex)

    def __mul__(self, other: "AnalyticModel") -> "Product":
        return Product((self, other))


@dataclass(frozen=True, eq=False)
class Polynomial(AnalyticModel):
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_complex_tuple(self.coeffs))
        if not self.coeffs:
            raise ValueError("polynomial needs at least one coefficient")

    def _eval(self, z):
        return np.polyval(self.coeffs[::-1], z)

    def _deriv(self, z):
        c = np.asarray(self.coeffs)
        if c.size == 1:
            return np.zeros_like(z)
        return np.polyval((c[1:] * np.arange(1, c.size))[::-1], z)

    def to_record(self) -> dict:
        return {"variant": "polynomial", "coeffs": [_pair(c) for c in self.coeffs]}


@dataclass(frozen=True, eq=False)
class PoleSum(AnalyticModel):
    """``sum_k a_k / (w_k - z)`` with every pole strictly outside the closed disk."""

    poles: tuple[complex, ...]
    weights: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "poles", _as_complex_tuple(self.poles))
        object.__setattr__(self, "weights", _as_complex_tuple(self.weights))
        if len(self.poles) != len(self.weights):
            raise ValueError("poles and weights must have equal length")
        if any(abs(w) <= 1.0 for w in self.poles):
            raise ValueError("pole-sum poles must satisfy |w| > 1")

    def _check(self, z):
        for w in self.poles:
            if np.any(z == w):
                raise PoleError(f"evaluation at the pole {w!r}")

    def _eval(self, z):
        self._check(z)
        out = np.zeros(z.shape, dtype=complex)
        for w, a in zip(self.poles, self.weights):
            out += a / (w - z)
        return out

    def _deriv(self, z):
        self._check(z)
        out = np.zeros(z.shape, dtype=complex)
        for w, a in zip(self.poles, self.weights):
            out += a / (w - z) ** 2
        return out

    def singularities(self):
        return np.asarray(self.poles, dtype=complex)

    def to_record(self) -> dict:
        return {"variant": "pole_sum",
                "poles": [_pair(w) for w in self.poles],
                "weights": [_pair(a) for a in self.weights]}


@dataclass(frozen=True, eq=False)
class BlaschkeFinite(AnalyticModel):
    zeros: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "zeros", _as_complex_tuple(self.zeros))
        if any(abs(a) >= 1.0 for a in self.zeros):
            raise ValueError("Blaschke zeros must lie in the open unit disk")

    def _check(self, z):
        for p in self.singularities():
            if np.any(z == p):
                raise PoleError(f"evaluation at the pole {p!r}")

    def _factors(self, z):
        vals = [(z - a) / (1 - np.conj(a) * z) for a in self.zeros]
        ders = [(1 - abs(a) ** 2) / (1 - np.conj(a) * z) ** 2 for a in self.zeros]
        return vals, ders

    def _eval(self, z):
        self._check(z)
        out = np.ones(z.shape, dtype=complex)
        for v in self._factors(z)[0]:
            out = out * v
        return out

    def _deriv(self, z):
        self._check(z)
        return _product_rule(*self._factors(z), z.shape)

    def singularities(self):
        return np.array([1 / np.conj(a) for a in self.zeros if a != 0], dtype=complex)

    def to_record(self) -> dict:
        return {"variant": "blaschke", "zeros": [_pair(a) for a in self.zeros]}


@dataclass(frozen=True, eq=False)
class SingularInner(AnalyticModel):
    """``S(z) = exp((z + 1) / (z - 1))``, essential singularity at ``z = 1``."""

    def _check(self, z):
        if np.any(z == 1.0):
            raise PoleError("the singular inner function is undefined at z = 1")

    def _exponent(self, z):
        return (z + 1) / (z - 1)

    def _eval(self, z):
        self._check(z)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self._exponent(z))

    def _deriv(self, z):
        self._check(z)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self._exponent(z)) * (-2.0 / (z - 1) ** 2)

    def singularities(self):
        return np.array([1.0 + 0j])

    def to_record(self) -> dict:
        return {"variant": "singular_inner"}


@dataclass(frozen=True, eq=False)
class Product(AnalyticModel):
    factors: tuple[AnalyticModel, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("product needs at least one factor")

    def _eval(self, z):
        out = np.ones(z.shape, dtype=complex)
        for f in self.factors:
            out = out * f._eval(z)
        return out

    def _deriv(self, z):
        vals = [f._eval(z) for f in self.factors]
        ders = [f._deriv(z) for f in self.factors]
        return _product_rule(vals, ders, z.shape)

    def singularities(self):
        return np.concatenate([f.singularities() for f in self.factors])

    def to_record(self) -> dict:
        return {"variant": "product", "factors": [f.to_record() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class Sum(AnalyticModel):
    terms: tuple[AnalyticModel, ...]
    weights: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        weights = self.weights if len(self.weights) else [1.0] * len(self.terms)
        object.__setattr__(self, "weights", _as_complex_tuple(weights))
        if len(self.weights) != len(self.terms) or not self.terms:
            raise ValueError("sum needs matching nonempty terms and weights")

    def _eval(self, z):
        out = np.zeros(z.shape, dtype=complex)
        for c, f in zip(self.weights, self.terms):
            out = out + c * f._eval(z)
        return out

    def _deriv(self, z):
        out = np.zeros(z.shape, dtype=complex)
        for c, f in zip(self.weights, self.terms):
            out = out + c * f._deriv(z)
        return out

    def singularities(self):
        return np.concatenate([f.singularities() for f in self.terms])

    def to_record(self) -> dict:
        return {"variant": "sum", "terms": [f.to_record() for f in self.terms],
                "weights": [_pair(c) for c in self.weights]}


def _product_rule(vals, ders, shape):
    out = np.zeros(shape, dtype=complex)
    for i, d in enumerate(ders):
        term = d
        for j, v in enumerate(vals):
            if j != i:
                term = term * v
        out = out + term
    return out


def model_from_record(record: dict) -> AnalyticModel:
    """Inverse of ``to_record``; complex numbers are ``[re, im]`` pairs."""
    variant = record.get("variant")
    if variant == "polynomial":
        return Polynomial(_unpair(record["coeffs"]))
    if variant == "pole_sum":
        return PoleSum(_unpair(record["poles"]), _unpair(record["weights"]))
    if variant == "blaschke":
        return BlaschkeFinite(_unpair(record["zeros"]))
    if variant == "singular_inner":
        return SingularInner()
    if variant == "product":
        return Product(tuple(model_from_record(r) for r in record["factors"]))
    if variant == "sum":
        terms = tuple(model_from_record(r) for r in record["terms"])
        return Sum(terms, _unpair(record.get("weights", [[1.0, 0.0]] * len(terms))))
    raise ValueError(f"unknown model variant {variant!r}")


def eval(m: AnalyticModel, z):  # noqa: A001 - mirrors the model call
    return m(z)


def eval_derivative(m: AnalyticModel, z):
    return m.derivative(z)


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class UnitCircle:
    tag = "unit_circle"


@dataclass(frozen=True)
class Vinogradov:
    r: float
    alpha: float

    @property
    def tag(self) -> str:
        return f"vinogradov(r={self.r!r},alpha={self.alpha!r})"

    def contains(self, z):
        return vinogradov_contains(self.r, self.alpha, z)


Region = Union[StarDomain, UnitCircle, Vinogradov]


@dataclass(frozen=True)
class SupNormEstimate:
    value: float
    grid_size: int
    region_tag: str

    def to_record(self) -> dict:
        return {"value": self.value, "grid_size": self.grid_size, "region_tag": self.region_tag}


def _level(n: int) -> int:
    return max(1, int(np.floor(np.log2(max(n, 2)))))


def _segment_fractions(n: int) -> np.ndarray:
    """Nested-in-``n`` fractions of a segment, clustered toward its start."""
    L = _level(n)
    uniform = np.arange(2 ** L + 1) / 2 ** L
    clustered = 2.0 ** (-np.arange(1, 4 * (L + 10) + 1) / 4)
    return np.unique(np.concatenate([uniform, clustered]))


def boundary_samples(region: Region, grid: int) -> np.ndarray:
    """Boundary points of ``region``; the sets are nested as ``grid`` grows."""
    if isinstance(region, UnitCircle):
        L = _level(grid)
        return np.exp(2j * np.pi * np.arange(2 ** L) / 2 ** L)
    if isinstance(region, Vinogradov):
        L = _level(grid // 3)
        circle = region.r * np.exp(2j * np.pi * np.arange(2 ** L) / 2 ** L)
        arg = np.mod(np.angle(circle - 1.0), 2 * np.pi)
        circle = circle[(arg >= region.alpha) & (arg <= 2 * np.pi - region.alpha)]
        ca = np.cos(region.alpha)
        reach = -ca + np.sqrt(ca * ca + region.r ** 2 - 1.0)
        s = _segment_fractions(grid // 3)
        s = s[s > 0] * reach
        rays = [1.0 + s * np.exp(1j * region.alpha), 1.0 + s * np.exp(-1j * region.alpha)]
        return np.concatenate([circle] + rays)
    if isinstance(region, StarDomain):
        segs = region.boundary_segments()
        s = _segment_fractions(grid // len(segs))
        return np.concatenate([a + s * (b - a) for a, b in segs])
    raise TypeError(f"unsupported region {region!r}")


def _region_tag(region: Region) -> str:
    if isinstance(region, StarDomain):
        return f"star_domain(points={len(region.set.points)},theta_min={region.theta_min!r})"
    return region.tag


def _check_analytic_on(m: AnalyticModel, region: Region):
    if isinstance(region, StarDomain):
        if not is_bounded_on(m, region):
            raise NotBoundedError("model is not bounded and analytic on the star domain")
        return
    sing = m.singularities()
    if isinstance(region, UnitCircle):
        bad = sing[np.abs(sing) < 1.0]
    else:
        bad = sing[np.asarray(region.contains(sing), dtype=bool)] if sing.size else sing
    if bad.size:
        raise NotBoundedError(f"singularity {complex(bad[0])!r} lies inside {_region_tag(region)}")


def sup_norm_estimate(m: AnalyticModel, region: Region, grid: int = 8192) -> SupNormEstimate:
    """Maximum of ``|m|`` over boundary samples of ``region``.

    By the maximum principle the boundary controls the interior, so the value
    is a lower estimate of the sup norm that improves as ``grid`` grows.
    Sample points where the model is singular are skipped.
    """
    _check_analytic_on(m, region)
    z = boundary_samples(region, grid)
    sing = m.singularities()
    if sing.size:
        z = z[np.all(z[:, None] != sing[None, :], axis=1)]
    vals = np.abs(m(z))
    vals = vals[np.isfinite(vals)]
    return SupNormEstimate(float(np.max(vals)), int(z.size), _region_tag(region))


def is_bounded_on(m: AnalyticModel, domain: StarDomain, margin: float = 1e-6) -> bool:
    """Whether ``m`` is bounded and analytic on the star domain.

    Poles must keep at least ``margin`` from the closed domain.  The singular
    inner function never qualifies: the point 1 is either inside the domain or
    a boundary point approached from inside a triangle, where ``|S|`` blows up.
    """
    if isinstance(m, Polynomial):
        return True
    if isinstance(m, SingularInner):
        return False
    if isinstance(m, (PoleSum, BlaschkeFinite)):
        return all(domain.distance(w) >= margin for w in m.singularities())
    if isinstance(m, Product):
        return all(is_bounded_on(f, domain, margin) for f in m.factors)
    if isinstance(m, Sum):
        return all(is_bounded_on(f, domain, margin) for f in m.terms)
    raise TypeError(f"unsupported model {m!r}")


def offending_singularities(m: AnalyticModel, domain: StarDomain, margin: float = 1e-6) -> list:
    """Singular points responsible for ``is_bounded_on`` failing (for diagnostics)."""
    return [complex(w) for w in m.singularities() if domain.distance(w) < margin]
