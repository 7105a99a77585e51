"""Iterative radix-2 FFT, batched over leading axes.

Kept in-house so transforms are bit-for-bit reproducible independent of the
numpy build; numpy.fft serves only as a cross-check in the tests.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@lru_cache(maxsize=None)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=None)
def _twiddles(size: int, sign: int) -> np.ndarray:
    return np.exp(sign * 2j * np.pi * np.arange(size // 2) / size)


def _transform(x, sign: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise ValueError(f"transform length must be a power of two, got {n}")
    batch = x.shape[:-1]
    a = x[..., _bit_reversal(n)]
    size = 2
    while size <= n:
        half = size // 2
        a = a.reshape(*batch, n // size, size)
        even = a[..., :half]
        odd = a[..., half:] * _twiddles(size, sign)
        a = np.concatenate([even + odd, even - odd], axis=-1)
        size *= 2
    return a.reshape(x.shape)


def fft(x) -> np.ndarray:
    """``X_k = sum_j x_j exp(-2 pi i j k / n)`` along the last axis."""
    return _transform(x, -1)


def ifft(x) -> np.ndarray:
    """Inverse of :func:`fft` (includes the ``1/n`` factor)."""
    x = np.asarray(x, dtype=complex)
    return _transform(x, 1) / x.shape[-1]


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())
