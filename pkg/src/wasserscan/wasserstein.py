"""Wasserstein-2 geometry for densities on the unit interval.

Every density is represented by its quantile function evaluated on a
shared grid of probability levels. In one dimension this representation
makes the Wasserstein-2 geometry Euclidean: the squared distance is the
integrated squared difference of quantile functions, and the barycenter
minimizing the mean squared distance is the pointwise average of the
quantile functions.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .kde import DensityEstimate, SupportInterval, UNIT_SUPPORT

__all__ = [
    "DegenerateDensityError",
    "QuantileFunction",
    "FrechetSummary",
    "midpoint_levels",
    "quantile_from_density",
    "w2_distance",
    "frechet_mean",
    "frechet_variance",
    "frechet_summary",
    "density_from_quantile",
]

DEFAULT_LEVEL_COUNT = 1000


class DegenerateDensityError(ValueError):
    """Raised when a quantile function carries no usable spread."""


def midpoint_levels(count=DEFAULT_LEVEL_COUNT):
    """Midpoints of `count` equal probability bins, avoiding 0 and 1."""
    count = int(count)
    if count < 1:
        raise ValueError(f"level count must positive, got {count}")
    return (np.arange(count) + 0.5) / count


@dataclass
class QuantileFunction:
    """Nondecreasing map from probability levels to unit-interval values."""

    levels: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.levels.shape != self.values.shape or self.levels.ndim != 1:
            raise ValueError("levels and values must be 1-d arrays of equal length")
        if self.levels.size == 0:
            raise ValueError("need at least one probability level")
        if self.levels[0] <= 0.0 or self.levels[-1] >= 1.0:
            raise ValueError("levels must lie strictly inside (0, 1)")
        if np.any(np.diff(self.levels) <= 0):
            raise ValueError("levels must be strictly increasing")
        if np.any(np.diff(self.values) < 0):
            raise ValueError("quantile values must be nondecreasing")
        if self.values[0] < 0.0 or self.values[-1] > 1.0:
            raise ValueError("quantile values must lie within [0, 1]")

    @property
    def level_count(self):
        return self.levels.size


@dataclass
class FrechetSummary:
    """Barycenter and attained mean squared distance of a density set."""

    mean: QuantileFunction
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")


def _same_levels(q1, q2):
    return q1.levels.shape == q2.levels.shape and np.array_equal(q1.levels, q2.levels)


def quantile_from_density(density, levels=None):
    """Quantile function of a grid density by CDF inversion.

    The CDF is the cumulative trapezoid of the density, rescaled to end
    exactly at 1. Inversion is the left-continuous generalized inverse:
    within a strictly increasing CDF cell the quantile is linearly
    interpolated, and a level that hits a flat CDF stretch maps to the left
    endpoint of that stretch.
    """
    if not isinstance(density, DensityEstimate):
        raise TypeError("expected a DensityEstimate")
    if levels is None:
        levels = midpoint_levels()
    else:
        levels = np.asarray(levels, dtype=float)

    cdf = cumulative_trapezoid(density.values, density.grid, initial=0.0)
    cdf /= cdf[-1]

    # First index where the CDF reaches each level; since cdf[idx-1] < t <=
    # cdf[idx] there, the interpolation denominator is strictly positive.
    idx = np.searchsorted(cdf, levels, side="left")
    idx = np.clip(idx, 1, cdf.size - 1)
    c0 = cdf[idx - 1]
    c1 = cdf[idx]
    frac = (levels - c0) / (c1 - c0)
    values = density.grid[idx - 1] + frac * (density.grid[idx] - density.grid[idx - 1])
    return QuantileFunction(levels=levels, values=values)


def w2_distance(q1, q2):
    """Wasserstein-2 distance between two quantile functions.

    Riemann approximation of the integrated squared quantile difference on
    the shared level grid.
    """
    if not _same_levels(q1, q2):
        raise ValueError("quantile functions must share one level grid")
    diff = q1.values - q2.values
    return float(np.sqrt(np.mean(diff * diff)))


def frechet_mean(quantile_functions):
    """Barycenter of a set of quantile functions.

    The pointwise average of quantile values minimizes the mean squared
    Wasserstein-2 distance to the set, and averaging preserves
    monotonicity, so the result is again a quantile function.
    """
    qs = list(quantile_functions)
    if not qs:
        raise ValueError("need at least one quantile function")
    first = qs[0]
    for q in qs[1:]:
        if not _same_levels(first, q):
            raise ValueError("quantile functions must share one level grid")
    stacked = np.vstack([q.values for q in qs])
    return QuantileFunction(levels=first.levels, values=stacked.mean(axis=0))


def frechet_variance(quantile_functions, mean):
    """Mean squared Wasserstein-2 distance to a given center."""
    qs = list(quantile_functions)
    if not qs:
        raise ValueError("need at least one quantile function")
    for q in qs:
        if not _same_levels(q, mean):
            raise ValueError("quantile functions must share one level grid")
    stacked = np.vstack([q.values for q in qs])
    sq = (stacked - mean.values) ** 2
    return float(sq.mean(axis=1).mean())


def frechet_summary(quantile_functions):
    """Barycenter together with the attained mean squared distance."""
    qs = list(quantile_functions)
    mean = frechet_mean(qs)
    return FrechetSummary(mean=mean, variance=frechet_variance(qs, mean))


def density_from_quantile(quantile, grid_size=1001, support=None):
    """Recover a grid density from a quantile function.

    Inverts the quantile back to a CDF by interpolation, differentiates
    numerically, clips negative values, and renormalizes to unit mass.
    Useful for displaying barycenters, which live on the quantile grid.
    """
    values = quantile.values
    if float(values[-1] - values[0]) <= 1e-12:
        raise DegenerateDensityError(
            "quantile function is constant; it has no density on the grid"
        )
    grid_size = int(grid_size)
    if grid_size < 2:
        raise ValueError(f"grid_size must be at least 2, got {grid_size}")

    # Right-continuous CDF: where several levels share one value (an atom),
    # keep the largest level for that value.
    xp, first_idx = np.unique(values, return_index=True)
    last_idx = np.append(first_idx[1:] - 1, values.size - 1)
    fp = quantile.levels[last_idx]

    # The level grid stops half a bin short of 0 and 1; extend the outer
    # CDF segments at their own slope so F reaches 0 and 1 continuously
    # instead of jumping there.
    if xp.size >= 2:
        lo_x = max(0.0, xp[0] - fp[0] * (xp[1] - xp[0]) / (fp[1] - fp[0]))
        hi_x = min(
            1.0, xp[-1] + (1.0 - fp[-1]) * (xp[-1] - xp[-2]) / (fp[-1] - fp[-2])
        )
        if lo_x < xp[0]:
            xp = np.concatenate([[lo_x], xp])
            fp = np.concatenate([[0.0], fp])
        if hi_x > xp[-1]:
            xp = np.concatenate([xp, [hi_x]])
            fp = np.concatenate([fp, [1.0]])

    grid = np.linspace(0.0, 1.0, grid_size)
    cdf = np.interp(grid, xp, fp, left=0.0, right=1.0)
    cdf = np.clip(cdf, 0.0, 1.0)

    dens = np.gradient(cdf, grid)
    dens = np.maximum(dens, 0.0)
    total = np.trapezoid(dens, grid)
    if total <= 0.0:
        raise DegenerateDensityError("quantile function yields an empty density")
    return DensityEstimate(
        grid=grid,
        values=dens / total,
        support=UNIT_SUPPORT if support is None else support,
    )
