"""Lacunary circle-set generators and the arc-ratio sufficient condition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle_geometry import ClosedCircleSet

# Anchors keep every complementary arc shorter than pi after truncation.
_ANCHORS = (0.0, np.pi, 1.5 * np.pi)
# Arcs created by the anchors: (pi/2, pi), (pi, 3pi/2), (3pi/2, 2pi).
ANCHOR_ARCS = 3

MAX_SUPERLACUNARY_K = 5


@dataclass(frozen=True)
class RatioReport:
    lengths_desc: tuple[float, ...]
    ratios: tuple[float, ...]
    tail_start: int
    tail_max_ratio: float

    def to_record(self) -> dict:
        return {
            "lengths_desc": list(self.lengths_desc),
            "ratios": list(self.ratios),
            "tail_start": self.tail_start,
            "tail_max_ratio": self.tail_max_ratio,
        }


def default_tail_start(cset: ClosedCircleSet) -> int:
    """First ratio index past the ratios between anchor arcs (clipped to the last ratio)."""
    return min(ANCHOR_ARCS - 1, len(cset.points) - 2)


def ratio_report(cset: ClosedCircleSet, tail_start: int | None = None) -> RatioReport:
    """Sort arc lengths nonincreasingly and collect consecutive ratios.

    ``ratios[k]`` is ``|J_{k+1}| / |J_k|`` in zero-based indexing, and the tail
    maximum is taken over ``k >= tail_start``.
    """
    lengths = np.sort(cset.gaps())[::-1]
    if lengths.size < 2:
        raise ValueError("need at least two complementary arcs")
    if tail_start is None:
        tail_start = default_tail_start(cset)
    ratios = lengths[1:] / lengths[:-1]
    if not 0 <= tail_start < ratios.size:
        raise ValueError(
            f"tail_start must be in [0, {ratios.size}) for {lengths.size} arcs, got {tail_start}")
    return RatioReport(
        tuple(float(x) for x in lengths),
        tuple(float(x) for x in ratios),
        int(tail_start),
        float(np.max(ratios[tail_start:])),
    )


def check_ratio_condition(report: RatioReport, beta: float) -> bool:
    """Whether all tail ratios are at most ``beta``.

    ``beta`` stands in for the unknown constant beta_p; there is no known
    value, so callers choose it (0.5 admits the dyadic family).
    """
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta!r}")
    return report.tail_max_ratio <= beta


def generate_dyadic_gap(K: int) -> ClosedCircleSet:
    """Points ``(pi/2) 2^-k`` for ``k = 0..K`` plus the anchors, accumulating at 0."""
    if K < 1:
        raise ValueError("K must be >= 1")
    pts = [0.5 * np.pi * 2.0 ** -k for k in range(K + 1)]
    return ClosedCircleSet.from_angles(list(_ANCHORS) + pts, accumulation=[0.0])


def generate_superlacunary(K: int) -> ClosedCircleSet:
    """Points ``(pi/2) 2^{-k^2}`` for ``k = 0..K`` plus the anchors.

    Gaps shrink super-geometrically, so consecutive arc ratios tend to 0.
    K is capped at 5: from K = 6 on the smallest gap drops to about 1e-11
    radians, below anything the sampling grids downstream can resolve.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > MAX_SUPERLACUNARY_K:
        raise ValueError(
            f"K={K} exceeds {MAX_SUPERLACUNARY_K}; gaps fall below the resolvable range")
    pts = [0.5 * np.pi * 2.0 ** -(k * k) for k in range(K + 1)]
    return ClosedCircleSet.from_angles(list(_ANCHORS) + pts, accumulation=[0.0])


GENERATORS = {
    "dyadic_gap": generate_dyadic_gap,
    "superlacunary": generate_superlacunary,
}
