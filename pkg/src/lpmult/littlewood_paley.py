"""Discrete Littlewood-Paley square functions on an N-point grid.

A closed set on the circle is discretized into cut frequencies in ``[0, N)``;
the blocks between consecutive cuts (the last one wrapping around) play the
role of the complementary intervals.  Norms use the normalized counting
measure ``(N^-1 sum |f|^p)^(1/p)`` so constants compare across ``N``.

Random search only brackets the constants: ``ratio_min`` is an upper bound for
the lower constant and ``ratio_max`` a lower bound for the upper constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle_geometry import ClosedCircleSet
from .fft import fft, ifft, is_power_of_two
from .lp_sets import generate_dyadic_gap


@dataclass(frozen=True)
class Block:
    start: int
    length: int

    def indices(self, N: int) -> np.ndarray:
        return (self.start + np.arange(self.length)) % N

    def mask(self, N: int) -> np.ndarray:
        m = np.zeros(N, dtype=bool)
        m[self.indices(N)] = True
        return m


@dataclass(frozen=True)
class FrequencyPartition:
    N: int
    cut_points: tuple[int, ...]
    blocks: tuple[Block, ...]

    def __post_init__(self):
        cover = np.zeros(self.N, dtype=int)
        for b in self.blocks:
            if b.length < 1:
                raise ValueError("blocks must be nonempty")
            cover[b.indices(self.N)] += 1
        if np.any(cover != 1):
            raise ValueError("blocks must be disjoint and cover every frequency")

    def masks(self) -> np.ndarray:
        return np.array([b.mask(self.N) for b in self.blocks])

    @classmethod
    def from_cuts(cls, N: int, cuts) -> "FrequencyPartition":
        cuts = sorted({int(c) % N for c in cuts})
        if len(cuts) < 2:
            raise ValueError("need at least two distinct cut frequencies")
        ends = cuts[1:] + [cuts[0] + N]
        blocks = tuple(Block(a, b - a) for a, b in zip(cuts, ends))
        return cls(N, tuple(cuts), blocks)


def partition_from_set(cset: ClosedCircleSet, N: int, strict: bool = True) -> FrequencyPartition:
    """Cuts at ``round(angle N / 2 pi) mod N``.

    Two points sharing a cut is an error unless ``strict=False``, which
    merges them (the coarser partition the grid can actually resolve).
    """
    if N < 8 or not is_power_of_two(N):
        raise ValueError(f"N must be a power of two >= 8, got {N}")
    raw = np.mod(np.rint(cset.angles * N / (2 * np.pi)).astype(int), N)
    uniq = np.unique(raw)
    if strict and uniq.size < raw.size:
        raise ValueError(f"distinct points share a cut frequency at N={N}")
    if uniq.size < 2:
        raise ValueError(f"all points collapse to a single cut at N={N}")
    return FrequencyPartition.from_cuts(N, uniq)


def dyadic_partition(N: int) -> FrequencyPartition:
    """Dyadic-gap set refined until its smallest block has length 1."""
    K = int(np.log2(N)) - 2
    return partition_from_set(generate_dyadic_gap(K), N)


def single_block_partition(N: int) -> FrequencyPartition:
    return FrequencyPartition(N, (0,), (Block(0, N),))


def project(f, block: Block) -> np.ndarray:
    """Frequency restriction to ``block`` along the last axis."""
    f = np.asarray(f, dtype=complex)
    return ifft(fft(f) * block.mask(f.shape[-1]))


def block_projections(f, partition: FrequencyPartition) -> np.ndarray:
    """All block projections, shape ``f.shape[:-1] + (blocks, N)``."""
    f = np.asarray(f, dtype=complex)
    F = fft(f)
    return ifft(F[..., None, :] * partition.masks())


def quadratic_function(f, partition: FrequencyPartition) -> np.ndarray:
    """``(sum_I |S_I f|^2)^(1/2)`` pointwise."""
    proj = block_projections(f, partition)
    return np.sqrt(np.sum(np.abs(proj) ** 2, axis=-2))


def normalized_norm(x, p: float) -> np.ndarray:
    """``(mean |x|^p)^(1/p)`` along the last axis."""
    a = np.abs(np.asarray(x))
    if np.isinf(p):
        return np.max(a, axis=-1)
    top = np.max(a, axis=-1, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    return top[..., 0] * np.mean((a / safe) ** p, axis=-1) ** (1.0 / p)


@dataclass(frozen=True)
class LPConstantsReport:
    p: float
    N: int
    trials: int
    ratio_min: float
    ratio_max: float
    seed: int

    def to_record(self) -> dict:
        return {"p": self.p, "N": self.N, "trials": self.trials,
                "ratio_min": self.ratio_min, "ratio_max": self.ratio_max, "seed": self.seed}


def _test_vectors(partition: FrequencyPartition, trials: int, seed: int) -> np.ndarray:
    N = partition.N
    masks = partition.masks().astype(float)
    vecs = []
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        vecs.append(rng.standard_normal(N) + 1j * rng.standard_normal(N))
    # structured adversaries: Dirac, single blocks, random-sign block sums
    spectra = [np.ones(N)] + list(masks)
    for i in range(trials):
        rng = np.random.default_rng([seed, trials + i])
        signs = rng.choice([-1.0, 1.0], size=masks.shape[0])
        spectra.append(signs @ masks)
    vecs.extend(ifft(np.array(spectra, dtype=complex)))
    return np.array(vecs)


def lp_constants_estimate(partition: FrequencyPartition, p: float, trials: int = 500,
                          seed: int = 0, chunk: int = 256) -> LPConstantsReport:
    """Min and max of ``||S f||_p / ||f||_p`` over seeded test vectors."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if not 1.0 < p < np.inf:
        raise ValueError(f"p must lie in (1, inf), got {p!r}")
    vecs = _test_vectors(partition, trials, seed)
    ratios = []
    for k in range(0, vecs.shape[0], chunk):
        f = vecs[k:k + chunk]
        ratios.append(normalized_norm(quadratic_function(f, partition), p) / normalized_norm(f, p))
    ratios = np.concatenate(ratios)
    return LPConstantsReport(p, partition.N, trials, float(np.min(ratios)),
                             float(np.max(ratios)), seed)
