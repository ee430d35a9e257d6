"""Self-validation statistics: rank-size power laws, head/tail breaks, overlap rates.

Heavy-tailed size distributions are summarized by an ordinary least-squares
fit on the log-log rank-size plot (the negated slope is the exponent), the
classification of a heavy tail uses recursive mean splits, and agreement
between two polygon sets is the intersected share of the subject set's area.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union

from .errors import InsufficientDataError, UndefinedRateError

HEAD_FRACTION_LIMIT = 0.4


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    r_squared: float
    n_used: int
    degenerate: bool = False


def rank_size_fit(sizes, head_only: bool = False) -> PowerLawFit:
    """OLS on (ln rank, ln size) after sorting descending; alpha = -slope.

    head_only keeps only values strictly above the mean before ranking.
    Constant sizes make R^2 undefined; that returns alpha 0, R^2 0, and the
    degenerate flag instead of an error.
    """
    sizes = np.asarray(sizes, dtype=float)
    if np.any(sizes <= 0) or np.any(~np.isfinite(sizes)):
        raise ValueError("sizes must be positive finite numbers")
    if head_only:
        sizes = sizes[sizes > sizes.mean()]
    if sizes.size < 3:
        raise InsufficientDataError(f"need >= 3 usable values, got {sizes.size}")

    ordered = np.sort(sizes)[::-1]
    x = np.log(np.arange(1, ordered.size + 1, dtype=float))
    y = np.log(ordered)

    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return PowerLawFit(alpha=0.0, r_squared=0.0, n_used=int(ordered.size), degenerate=True)

    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    r_squared = 1.0 - float(np.sum(residuals**2)) / ss_tot
    return PowerLawFit(
        alpha=float(-slope),
        r_squared=float(min(max(r_squared, 0.0), 1.0)),
        n_used=int(ordered.size),
    )


def head_tail_break(values) -> list[float]:
    """Recursive mean splits of a heavy-tailed list; returns the breakpoints.

    Each split records the current mean and recurses into the head (values
    strictly above the mean) while the head holds at most 40% of the current
    values and at least 2 of them. An empty head stops without recording.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise InsufficientDataError(f"need >= 2 values, got {values.size}")
    breakpoints: list[float] = []
    current = values
    while True:
        mean = float(current.mean())
        head = current[current > mean]
        if head.size == 0:
            break
        breakpoints.append(mean)
        if head.size / current.size > HEAD_FRACTION_LIMIT or head.size < 2:
            break
        current = head
    return breakpoints


def overlap_rate(ours, reference) -> float:
    """area(ours intersect reference) / area(ours), in [0, 1]."""
    ours_geom = _as_union(ours)
    ref_geom = _as_union(reference)
    denom = ours_geom.area
    if denom == 0.0:
        raise UndefinedRateError("subject set has zero area; overlap rate undefined")
    return float(ours_geom.intersection(ref_geom).area / denom)


def _as_union(polys) -> BaseGeometry:
    if isinstance(polys, BaseGeometry):
        return polys
    return unary_union(list(polys))
