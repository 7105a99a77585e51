"""Finite-section estimates of l^p multiplier norms.

Multiplication by ``m`` acts on Taylor coefficient sequences as the
lower-triangular Toeplitz operator ``(Tx)_n = sum_{k<=n} m_hat(n-k) x_k``.
Its ``N x N`` leading section ``T_N`` is what gets measured here.  Section
norms increase with ``N`` toward the operator norm, so every number below is a
surrogate for the true multiplier norm, not the norm itself.

For lower-triangular Toeplitz sections the ``l^p`` and ``l^q`` norms coincide
when ``1/p + 1/q = 1`` (the adjoint is the conjugated flip of ``T_N``), which
lets lower bounds at ``p`` and at ``q`` be pooled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytic_models import AnalyticModel
from .fft import fft, ifft, next_power_of_two
from .taylor import CoefficientSequence, p_norm, taylor

DENSE_SVD_LIMIT = 2048
DENSE_APPLY_LIMIT = 1024


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before the stopping rule was met."""


def dual_exponent(p: float) -> float:
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False)
class ToeplitzTruncation:
    symbol: np.ndarray
    N: int
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        # shorter symbols are padded with zeros (finitely many nonzero coefficients)
        sym = np.zeros(self.N, dtype=complex)
        given = np.asarray(self.symbol, dtype=complex).ravel()[:self.N]
        sym[:given.size] = given
        object.__setattr__(self, "symbol", sym)

    def _symbol_fft(self):
        if "fft" not in self._cache:
            L = next_power_of_two(2 * self.N)
            pad = np.zeros(L, dtype=complex)
            pad[:self.N] = self.symbol
            self._cache["fft"] = (L, fft(pad))
        return self._cache["fft"]

    def dense(self) -> np.ndarray:
        if "dense" not in self._cache:
            n = np.arange(self.N)
            diff = n[:, None] - n[None, :]
            self._cache["dense"] = np.where(diff >= 0, self.symbol[np.clip(diff, 0, None)], 0)
        return self._cache["dense"]

    def apply(self, x, method: str = "auto") -> np.ndarray:
        """``T_N x`` along the last axis of ``x``.

        ``method`` is ``"direct"`` (dense product), ``"fft"`` (zero-padded
        circular convolution) or ``"auto"`` (direct up to N = 1024).
        """
        x = np.asarray(x, dtype=complex)
        if x.shape[-1] != self.N:
            raise ValueError(f"vector length {x.shape[-1]} does not match N={self.N}")
        if method == "auto":
            method = "direct" if self.N <= DENSE_APPLY_LIMIT else "fft"
        if method == "direct":
            return x @ self.dense().T
        if method != "fft":
            raise ValueError(f"unknown method {method!r}")
        L, sym = self._symbol_fft()
        pad = np.zeros(x.shape[:-1] + (L,), dtype=complex)
        pad[..., :self.N] = x
        return ifft(fft(pad) * sym)[..., :self.N]

    def apply_adjoint(self, y, method: str = "auto") -> np.ndarray:
        """``T_N^* y``, using ``T^* = J conj(T) J`` with ``J`` the flip."""
        y = np.asarray(y, dtype=complex)
        return np.conj(self.apply(np.conj(y[..., ::-1]), method))[..., ::-1]


def toeplitz_truncation(symbol, N: int) -> ToeplitzTruncation:
    coeffs = symbol.coeffs if isinstance(symbol, CoefficientSequence) else symbol
    return ToeplitzTruncation(np.asarray(coeffs, dtype=complex), N)


def norm_exact_1_inf(T: ToeplitzTruncation, p: float = 1) -> float:
    """Exact ``l^1`` or ``l^inf`` norm: max column sum or max row sum.

    Column ``j`` sums ``|m_hat(0..N-1-j)|`` and row ``n`` sums
    ``|m_hat(0..n)|``, so both maxima are the partial ``l^1`` sum of the
    symbol.  Both are formed and checked against each other.
    """
    if p not in (1, np.inf):
        raise ValueError(f"exact norms exist only for p = 1 or inf, got {p!r}")
    partial = np.cumsum(np.abs(T.symbol))
    col_sums = partial[::-1]
    row_sums = partial
    col_max, row_max = float(np.max(col_sums)), float(np.max(row_sums))
    if col_max != row_max:
        raise AssertionError("column and row sums disagree for a Toeplitz section")
    return col_max if p == 1 else row_max


def power_iteration(T: ToeplitzTruncation, tol: float = 1e-10, max_iter: int = 100000):
    """Power iteration on ``T^* T`` from the constant vector.

    Returns ``(value, vector, converged)`` where ``value = ||T vector||`` for
    the unit ``vector`` and never exceeds the largest singular value.  Small
    sections iterate with the cached Gram matrix, one product per step.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if T.N <= DENSE_APPLY_LIMIT:
        if "gram" not in T._cache:
            A = T.dense()
            T._cache["gram"] = A.conj().T @ A
        G = T._cache["gram"]

        def step(x):
            z = G @ x
            return np.sqrt(max(float(np.vdot(x, z).real), 0.0)), z
    else:
        def step(x):
            y = T.apply(x)
            return float(np.linalg.norm(y)), T.apply_adjoint(y)

    x = np.full(T.N, 1.0 / np.sqrt(T.N), dtype=complex)
    best, best_x, prev = 0.0, x, 0.0
    for _ in range(max_iter):
        val, z = step(x)
        if val > best:
            best, best_x = val, x
        if val == 0.0 or abs(val - prev) <= tol * val:
            return best, best_x, True
        prev = val
        x = z / np.linalg.norm(z)
    return best, best_x, False


def top_singular_vector(T: ToeplitzTruncation, max_iter: int = 10000) -> np.ndarray:
    """Power-iteration estimate of the top right singular vector (cached on ``T``)."""
    key = ("top_vector", max_iter)
    if key not in T._cache:
        T._cache[key] = power_iteration(T, tol=1e-13, max_iter=max_iter)[1]
    return T._cache[key]


def norm_2(T: ToeplitzTruncation, tol: float = 1e-10, max_iter: int = 100000) -> float:
    """Largest singular value of the section by power iteration."""
    value, _, converged = power_iteration(T, tol, max_iter)
    if not converged:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    return value


def norm_2_svd(T: ToeplitzTruncation) -> float:
    """Largest singular value from a dense LAPACK decomposition."""
    return float(np.linalg.svd(T.dense(), compute_uv=False)[0])


def _row_scaled(v):
    # rows divided by their largest modulus; the callers only need directions
    top = np.max(np.abs(v), axis=-1, keepdims=True)
    return np.divide(v, top, out=np.zeros_like(v), where=top > 0)


def _dual_map(v, p: float):
    """``|v|^(p-1) v/|v|`` up to a positive factor per row."""
    w = _row_scaled(v)
    a = np.abs(w)
    # below tiny the phase division can overflow; such entries contribute nothing
    phase = np.divide(w, a, out=np.zeros_like(w), where=a > np.finfo(float).tiny)
    return a ** (p - 1.0) * phase


def _row_norms(x, p: float) -> np.ndarray:
    a = np.abs(x)
    top = np.max(a, axis=1)
    safe = np.where(top > 0, top, 1.0)
    return top * np.sum((a / safe[:, None]) ** p, axis=1) ** (1.0 / p)


def _normalize(x, p: float):
    x = _row_scaled(x)
    norms = _row_norms(x, p)
    norms[norms == 0.0] = 1.0
    return x / norms[:, None]


@dataclass(frozen=True, eq=False)
class BoydResult:
    value: float
    vector: np.ndarray
    iterations: int


def boyd_lower(T: ToeplitzTruncation, p: float, seed: int = 0, tol: float = 1e-8,
               restarts: int = 8, max_iter: int = 500, warm_start=None) -> BoydResult:
    """Boyd fixed-point iteration for ``||T||_{p->p}``, run from several starts.

    Starts are ``e_0``, the constant vector, the power-iteration estimate of
    the top right singular vector, ``restarts`` complex
    Gaussian vectors drawn from ``seed`` and, when given, ``warm_start``
    zero-padded to length N.  Every iterate gives the certified lower bound
    ``||T x||_p / ||x||_p``; the best one over all iterates is returned.
    """
    if not 1.0 < p < np.inf:
        raise ValueError(f"Boyd iteration needs 1 < p < inf, got {p!r}")
    N = T.N
    q = dual_exponent(p)
    rng = np.random.default_rng(seed)
    starts = [np.eye(1, N, 0, dtype=complex)[0], np.ones(N, dtype=complex),
              top_singular_vector(T)]
    starts += list(rng.standard_normal((restarts, N)) + 1j * rng.standard_normal((restarts, N)))
    if warm_start is not None:
        w = np.zeros(N, dtype=complex)
        w[:min(N, len(warm_start))] = np.asarray(warm_start)[:N]
        if np.any(w != 0):
            starts.append(w)
    x = _normalize(np.array(starts), p)

    best_val = np.full(x.shape[0], -1.0)
    best_vec = x.copy()
    prev = np.zeros(x.shape[0])
    it = 0
    for it in range(1, max_iter + 1):
        y = T.apply(x)
        vals = _row_norms(y, p)
        improved = vals > best_val
        best_val = np.where(improved, vals, best_val)
        best_vec[improved] = x[improved]
        if np.all(np.abs(vals - prev) <= tol * np.maximum(vals, 1e-300)):
            break
        prev = vals
        z = T.apply_adjoint(_dual_map(y, p))
        x = _normalize(_dual_map(z, q), p)
        # rows that collapsed to zero keep their previous iterate
        dead = ~np.any(x != 0, axis=1)
        x[dead] = best_vec[dead]
    k = int(np.argmax(best_val))
    return BoydResult(float(best_val[k]), best_vec[k], it)


def norm_p_lower_boyd(T: ToeplitzTruncation, p: float, seed: int = 0, tol: float = 1e-8,
                      restarts: int = 8, max_iter: int = 500) -> float:
    return boyd_lower(T, p, seed, tol, restarts, max_iter).value


def interpolation_upper(p: float, a1: float, a2: float) -> float:
    """Riesz-Thorin bound from the exact ``l^1 = l^inf`` norm and the ``l^2`` norm."""
    if p == 2:
        return a2
    if p == 1 or np.isinf(p):
        return a1
    if p < 2:
        theta = 2.0 * (1.0 - 1.0 / p)
        return a1 ** (1.0 - theta) * a2 ** theta
    return a2 ** (2.0 / p) * a1 ** (1.0 - 2.0 / p)


def norm_p_upper_interpolate(T: ToeplitzTruncation, p: float, a2: float | None = None) -> float:
    """Interpolated upper bound; ``a2`` defaults to a dense SVD for ``N <= 2048``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    a1 = norm_exact_1_inf(T, 1)
    if a2 is None:
        a2 = norm_2_svd(T) if T.N <= DENSE_SVD_LIMIT else norm_2(T)
    return interpolation_upper(p, a1, a2)


@dataclass(frozen=True, eq=False)
class NormEstimate:
    p: float
    N: int
    lower: float
    upper: float
    methods: dict
    iterations: int = 0
    seed: int = 0
    vectors: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise AssertionError(
                f"invalid bracket at p={self.p}, N={self.N}: {self.lower} > {self.upper}")

    def to_record(self) -> dict:
        return {"p": self.p, "N": self.N, "lower": self.lower, "upper": self.upper,
                "methods": dict(self.methods), "iterations": self.iterations,
                "seed": self.seed}


def _bracket(T: ToeplitzTruncation, p: float, seed: int, tol: float, restarts: int,
             max_iter: int, warm: dict, coeff_method: str) -> NormEstimate:
    a1 = norm_exact_1_inf(T, 1)
    if p == 1 or np.isinf(p):
        return NormEstimate(p, T.N, a1, a1, {"coefficients": coeff_method,
                                             "lower": "exact", "upper": "exact"}, 0, seed)
    if T.N <= DENSE_SVD_LIMIT:
        a2, a2_method = norm_2_svd(T), "svd"
    else:
        a2, a2_method = norm_2(T), "power"
    upper = interpolation_upper(p, a1, a2)
    q = dual_exponent(p)
    candidates = {}
    for r in sorted({p, q}):
        res = boyd_lower(T, r, seed, tol, restarts, max_iter, warm.get(r))
        candidates[r] = res
    r_best = max(candidates, key=lambda r: candidates[r].value)
    lower = candidates[r_best].value
    if p == 2:
        lower_method = "boyd(p=2)"
        upper_method = f"norm_2:{a2_method}"
    else:
        lower_method = f"boyd(p={r_best:.6g})"
        upper_method = f"riesz_thorin(a1=exact,a2={a2_method})"
    return NormEstimate(
        p, T.N, lower, upper,
        {"coefficients": coeff_method, "lower": lower_method, "upper": upper_method},
        int(sum(c.iterations for c in candidates.values())), seed,
        {r: c.vector for r, c in candidates.items()})


def multiplier_norm_estimate(m: AnalyticModel, p: float, N: int, seed: int = 0,
                             tol: float = 1e-8, restarts: int = 8, max_iter: int = 500,
                             coeffs: CoefficientSequence | None = None,
                             warm: dict | None = None) -> NormEstimate:
    """Bracket ``[lower, upper]`` for the l^p norm of the ``N``-section of ``m``."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    if coeffs is None:
        coeffs = taylor(m, N)
    T = toeplitz_truncation(coeffs, N)
    return _bracket(T, p, seed, tol, restarts, max_iter, warm or {}, coeffs.source)


def multiplier_norm_curve(m: AnalyticModel, p: float, N_list, seed: int = 0,
                          tol: float = 1e-8, restarts: int = 8, max_iter: int = 500,
                          coeffs: CoefficientSequence | None = None) -> list[NormEstimate]:
    """Brackets over increasing ``N``; lower bounds are nondecreasing.

    Coefficients are computed once at the largest ``N`` so every section is
    the leading block of the next, and each Boyd run is warm-started from the
    previous maximizer padded with zeros.
    """
    N_sorted = sorted(N_list)
    if coeffs is None:
        coeffs = taylor(m, N_sorted[-1])
    out, warm = [], {}
    for N in N_sorted:
        est = multiplier_norm_estimate(m, p, N, seed, tol, restarts, max_iter, coeffs, warm)
        warm = est.vectors
        out.append(est)
    return out
