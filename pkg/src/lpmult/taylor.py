"""Taylor coefficients of analytic models and l^p sequence norms.

Closed-form models get exact coefficients.  Anything else goes through a
DFT on the circle ``|z| = rho``; each DFT sequence carries ``alias_bound``,
an error bound covering aliasing plus a floating-point allowance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic_models import (AnalyticModel, BlaschkeFinite, PoleSum, Polynomial,
                              Product, SingularInner, Sum)
from .fft import fft, is_power_of_two, next_power_of_two

ALIAS_TARGET = 1e-10
MAX_DFT_SIZE = 1 << 21


class UnsupportedModelError(TypeError):
    """No closed-form coefficient formula exists for the model."""


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    coeffs: np.ndarray
    source: str = "exact"
    rho: float | None = None
    M: int | None = None
    alias_bound: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        if self.source == "dft" and self.alias_bound is None:
            raise ValueError("DFT coefficients must carry an alias bound")

    def __len__(self) -> int:
        return self.coeffs.size

    @property
    def N(self) -> int:
        return self.coeffs.size

    def to_record(self) -> dict:
        return {
            "N": self.N,
            "source": self.source,
            "rho": self.rho,
            "M": self.M,
            "alias_bound": self.alias_bound,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_record(cls, record: dict) -> "CoefficientSequence":
        coeffs = np.array([complex(re, im) for re, im in record["coeffs"]])
        return cls(coeffs, record["source"], record.get("rho"), record.get("M"),
                   record.get("alias_bound"))


def _exact(m: AnalyticModel, N: int) -> np.ndarray:
    n = np.arange(N)
    if isinstance(m, Polynomial):
        c = np.zeros(N, dtype=complex)
        k = min(N, len(m.coeffs))
        c[:k] = m.coeffs[:k]
        return c
    if isinstance(m, PoleSum):
        c = np.zeros(N, dtype=complex)
        for w, a in zip(m.poles, m.weights):
            c += a * w ** -(n + 1.0)
        return c
    if isinstance(m, BlaschkeFinite):
        c = np.zeros(N, dtype=complex)
        c[0] = 1.0
        for a in m.zeros:
            # (z - a)/(1 - conj(a) z) = -a + sum_{n>=1} (1 - |a|^2) conj(a)^{n-1} z^n
            f = np.empty(N, dtype=complex)
            f[0] = -a
            f[1:] = (1 - abs(a) ** 2) * np.conj(a) ** (n[1:] - 1.0)
            c = np.convolve(c, f)[:N]
        return c
    if isinstance(m, Product):
        c = np.zeros(N, dtype=complex)
        c[0] = 1.0
        for f in m.factors:
            c = np.convolve(c, _exact(f, N))[:N]
        return c
    if isinstance(m, Sum):
        return sum(w * _exact(f, N) for w, f in zip(m.weights, m.terms))
    raise UnsupportedModelError(f"no closed-form coefficients for {type(m).__name__}; use taylor_dft")


def taylor_exact(m: AnalyticModel, N: int) -> CoefficientSequence:
    """First ``N`` Taylor coefficients from closed forms."""
    if N < 1:
        raise ValueError("N must be positive")
    return CoefficientSequence(_exact(m, N), "exact")


def has_exact_coefficients(m: AnalyticModel) -> bool:
    if isinstance(m, (Polynomial, PoleSum, BlaschkeFinite)):
        return True
    if isinstance(m, Product):
        return all(has_exact_coefficients(f) for f in m.factors)
    if isinstance(m, Sum):
        return all(has_exact_coefficients(f) for f in m.terms)
    return False


def disk_sup_bound(m: AnalyticModel) -> float:
    """Rigorous upper bound for ``sup |m|`` over the unit disk.

    Also bounds every Taylor coefficient, which is what the alias estimate
    needs.
    """
    if isinstance(m, Polynomial):
        return float(np.sum(np.abs(m.coeffs)))
    if isinstance(m, PoleSum):
        return float(sum(abs(a) / (abs(w) - 1.0) for w, a in zip(m.poles, m.weights)))
    if isinstance(m, (BlaschkeFinite, SingularInner)):
        return 1.0
    if isinstance(m, Product):
        return float(np.prod([disk_sup_bound(f) for f in m.factors]))
    if isinstance(m, Sum):
        return float(sum(abs(w) * disk_sup_bound(f) for w, f in zip(m.weights, m.terms)))
    raise TypeError(f"unsupported model {m!r}")


def default_dft_params(m: AnalyticModel, N: int) -> tuple[float, int]:
    """Pick ``(rho, M)``: ``rho^-(N-1)`` stays below 10 and aliasing below 1e-10."""
    rho = max(0.95, 10.0 ** (-1.0 / max(N - 1, 1)))
    sup = max(disk_sup_bound(m), 1e-300)
    # sup * rho^M / (1 - rho^M) <= target  <=  rho^M <= target / (sup + target)
    need = np.log(ALIAS_TARGET / (sup + ALIAS_TARGET)) / np.log(rho)
    M = next_power_of_two(max(N, int(np.ceil(need))))
    return rho, min(M, MAX_DFT_SIZE)


def taylor_dft(m: AnalyticModel, N: int, rho: float | None = None,
               M: int | None = None) -> CoefficientSequence:
    """Coefficients ``(1/M) sum_j m(rho w^j) w^{-jn} rho^{-n}`` with ``w = e^{2 pi i/M}``."""
    d_rho, d_M = default_dft_params(m, N)
    rho = d_rho if rho is None else rho
    M = d_M if M is None else M
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho!r}")
    if M < N or not is_power_of_two(M):
        raise ValueError(f"M must be a power of two >= N, got M={M}, N={N}")
    samples = m(rho * np.exp(2j * np.pi * np.arange(M) / M))
    c = fft(samples)[:N] / M
    scale = rho ** -np.arange(N, dtype=float)
    coeffs = c * scale

    rm = rho ** M
    alias = disk_sup_bound(m) * rm / (1.0 - rm)
    roundoff = 4 * np.finfo(float).eps * (np.log2(M) + 1) * np.max(np.abs(samples)) * scale[-1]
    return CoefficientSequence(coeffs, "dft", float(rho), int(M), float(alias + roundoff))


def taylor(m: AnalyticModel, N: int) -> CoefficientSequence:
    """Exact coefficients when a closed form exists, DFT coefficients otherwise."""
    if has_exact_coefficients(m):
        return taylor_exact(m, N)
    return taylor_dft(m, N)


def p_norm(seq, p: float) -> float:
    """l^p norm of a finite sequence (``p = inf`` allowed), overflow-safe."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    x = seq.coeffs if isinstance(seq, CoefficientSequence) else np.asarray(seq)
    a = np.abs(x)
    if a.size == 0:
        return 0.0
    top = float(np.max(a))
    if np.isinf(p) or top == 0.0:
        return top
    return top * float(np.sum((a / top) ** p)) ** (1.0 / p)
