"""Boundary-corrected kernel density estimation on a compact support.

Standard kernel estimators lose mass near the endpoints of a bounded
support, which biases the estimate exactly where rate-type data tend to
pile up. The estimator here rescales the kernel by the reciprocal of its
truncated mass whenever the evaluation point sits within one bandwidth of
an endpoint, and then renormalizes the whole curve so that it integrates
to one on the estimation grid.

All estimation happens on the unit interval; samples on an arbitrary
compact support are affinely mapped to [0, 1] and the support is kept on
the result for mapping back.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

__all__ = [
    "Kernel",
    "Epanechnikov",
    "TruncatedGaussian",
    "get_kernel",
    "SupportInterval",
    "RawSample",
    "DensityEstimate",
    "boundary_weight",
    "estimate_density",
    "select_bandwidth",
    "common_bandwidth",
]

DEFAULT_GRID_SIZE = 1001

# Fallback bandwidth when the sample has no dispersion at all.
MIN_BANDWIDTH = 0.05

# Largest admissible bandwidth: strictly below half the unit support.
MAX_BANDWIDTH = 0.5 - 1e-6


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

class Kernel:
    """Symmetric probability kernel supported on [-1, 1]."""

    name = ""

    def density(self, u):
        raise NotImplementedError

    def mass(self, a, b):
        """Integral of the kernel over [a, b], clipped to the support."""
        raise NotImplementedError


class Epanechnikov(Kernel):
    """K(u) = 0.75 (1 - u^2) on [-1, 1]."""

    name = "epanechnikov"

    def density(self, u):
        u = np.asarray(u, dtype=float)
        return 0.75 * np.maximum(0.0, 1.0 - u * u)

    def mass(self, a, b):
        # Antiderivative 0.75 u - 0.25 u^3 + 0.5, equal to 0 at -1 and 1 at 1.
        a = np.clip(a, -1.0, 1.0)
        b = np.clip(b, -1.0, 1.0)
        fa = 0.75 * a - 0.25 * a ** 3
        fb = 0.75 * b - 0.25 * b ** 3
        return np.maximum(fb - fa, 0.0)


class TruncatedGaussian(Kernel):
    """Standard normal density truncated to [-1, 1] and renormalized."""

    name = "gaussian"

    _norm = ndtr(1.0) - ndtr(-1.0)

    def density(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) <= 1.0
        vals = np.exp(-0.5 * u * u) / (np.sqrt(2.0 * np.pi) * self._norm)
        return np.where(inside, vals, 0.0)

    def mass(self, a, b):
        a = np.clip(a, -1.0, 1.0)
        b = np.clip(b, -1.0, 1.0)
        return np.maximum((ndtr(b) - ndtr(a)) / self._norm, 0.0)


_KERNELS = {
    "epanechnikov": Epanechnikov(),
    "gaussian": TruncatedGaussian(),
}


def get_kernel(kernel):
    """Resolve a kernel name or instance to a Kernel."""
    if isinstance(kernel, Kernel):
        return kernel
    try:
        return _KERNELS[str(kernel).lower()]
    except KeyError:
        raise ValueError(
            f"unknown kernel {kernel!r}; expected one of {sorted(_KERNELS)}"
        ) from None


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportInterval:
    """Compact interval on which the data and its density live."""

    lower: float
    upper: float

    def __post_init__(self):
        if not np.isfinite(self.lower) or not np.isfinite(self.upper):
            raise ValueError("support bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(
                f"support lower bound {self.lower} must be below upper bound {self.upper}"
            )

    @property
    def width(self):
        return self.upper - self.lower

    def to_unit(self, values):
        """Affinely map values on [lower, upper] to [0, 1]."""
        return (np.asarray(values, dtype=float) - self.lower) / self.width

    def from_unit(self, values):
        """Map unit-interval coordinates back to the original scale."""
        return self.lower + np.asarray(values, dtype=float) * self.width


UNIT_SUPPORT = SupportInterval(0.0, 1.0)


@dataclass(frozen=True)
class RawSample:
    """An i.i.d. sample together with the support it lives on."""

    values: np.ndarray
    support: SupportInterval = UNIT_SUPPORT

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ValueError("sample values must be one-dimensional")
        if values.size < 2:
            raise ValueError(f"sample needs at least 2 values, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        if values.min() < self.support.lower or values.max() > self.support.upper:
            raise ValueError(
                "sample values fall outside the declared support "
                f"[{self.support.lower}, {self.support.upper}]"
            )
        object.__setattr__(self, "values", values)

    @property
    def size(self):
        return self.values.size

    def unit_values(self):
        return self.support.to_unit(self.values)


@dataclass
class DensityEstimate:
    """Density on a uniform unit-interval grid, integrating to one.

    ``grid`` and ``values`` refer to the unit-rescaled support; ``support``
    records the original interval so results can be mapped back.
    """

    grid: np.ndarray
    values: np.ndarray
    support: SupportInterval = UNIT_SUPPORT

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(self.values < 0):
            raise ValueError("density values must be nonnegative")
        total = np.trapezoid(self.values, self.grid)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"density must integrate to 1, got {total!r}")

    @property
    def grid_size(self):
        return self.grid.size

    def grid_original(self):
        """Grid points on the original support scale."""
        return self.support.from_unit(self.grid)

    def values_original(self):
        """Density values rescaled to the original support."""
        return self.values / self.support.width


# ---------------------------------------------------------------------------
# Boundary weight
# ---------------------------------------------------------------------------

def _check_bandwidth(h):
    h = float(h)
    if not (0.0 < h < 0.5):
        raise ValueError(f"bandwidth must satisfy 0 < h < 1/2, got {h}")
    return h


def boundary_weight(x, h, kernel="epanechnikov"):
    """Reciprocal truncated-kernel mass at position x in [0, 1].

    Equals 1 on the interior [h, 1-h]; near either endpoint it is the
    reciprocal of the kernel mass that remains inside the support, so the
    result is always >= 1.
    """
    h = _check_bandwidth(h)
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"position must lie in [0, 1], got {x}")
    kernel = get_kernel(kernel)
    if x < h:
        return float(1.0 / kernel.mass(-x / h, 1.0))
    if x > 1.0 - h:
        return float(1.0 / kernel.mass(-1.0, (1.0 - x) / h))
    return 1.0


def _boundary_weights(grid, h, kernel):
    """Vectorized boundary weights over a grid in [0, 1]."""
    w = np.ones_like(grid)
    left = grid < h
    right = grid > 1.0 - h
    if np.any(left):
        w[left] = 1.0 / kernel.mass(-grid[left] / h, 1.0)
    if np.any(right):
        w[right] = 1.0 / kernel.mass(-1.0, (1.0 - grid[right]) / h)
    return w


# ---------------------------------------------------------------------------
# Density estimation
# ---------------------------------------------------------------------------

def estimate_density(sample, kernel="epanechnikov", bandwidth=None,
                     grid_size=DEFAULT_GRID_SIZE, boundary_correction=True):
    """Estimate a density on [0, 1] from a sample on a compact support.

    Parameters
    ----------
    sample : RawSample
        Observations with their support; values are rescaled to [0, 1]
        internally.
    kernel : str or Kernel
        Kernel family; "epanechnikov" (default) or "gaussian" (truncated).
    bandwidth : float, optional
        Bandwidth as a fraction of the unit support, in (0, 1/2). When
        omitted it is chosen by :func:`select_bandwidth`.
    grid_size : int
        Number of uniformly spaced grid points on [0, 1].
    boundary_correction : bool
        When False the boundary weight is held at 1 everywhere, which is
        the standard (uncorrected) estimator renormalized the same way.
        Exposed for side-by-side comparisons.

    Returns
    -------
    DensityEstimate
        Nonnegative values on the grid with unit trapezoidal integral.
    """
    if not isinstance(sample, RawSample):
        sample = RawSample(np.asarray(sample, dtype=float))
    kernel = get_kernel(kernel)
    grid_size = int(grid_size)
    if grid_size < 2:
        raise ValueError(f"grid_size must be at least 2, got {grid_size}")
    if bandwidth is None:
        h = select_bandwidth(sample, grid_size=grid_size)
    else:
        h = _check_bandwidth(bandwidth)

    # Sorting makes the kernel sums independent of input order, so
    # permuting the sample reproduces the estimate bit for bit.
    z = np.sort(sample.unit_values())
    grid = np.linspace(0.0, 1.0, grid_size)
    spacing = 1.0 / (grid_size - 1)

    if np.ptp(z) == 0.0 and h < spacing:
        warnings.warn(
            "sample is a single atom and the bandwidth is below the grid "
            "resolution; the estimate degenerates to a grid spike",
            stacklevel=2,
        )

    num = kernel.density((grid[:, None] - z[None, :]) / h).sum(axis=1)
    if boundary_correction:
        num *= _boundary_weights(grid, h, kernel)
    denom = np.trapezoid(num, grid)

    if not np.isfinite(denom) or denom <= 0.0:
        # No grid point sees any kernel mass; concentrate everything on the
        # grid point nearest the sample so the estimate still has unit mass.
        values = np.zeros_like(grid)
        j = int(np.clip(round(float(np.mean(z)) / spacing), 0, grid_size - 1))
        cell = spacing if 0 < j < grid_size - 1 else spacing / 2.0
        values[j] = 1.0 / cell
        warnings.warn(
            "kernel mass vanished on the grid; emitting a unit-mass spike",
            stacklevel=2,
        )
        return DensityEstimate(grid=grid, values=values, support=sample.support)

    return DensityEstimate(grid=grid, values=num / denom, support=sample.support)


# ---------------------------------------------------------------------------
# Bandwidth selection
# ---------------------------------------------------------------------------

def _silverman_rule(z):
    """Rule-of-thumb bandwidth on unit-rescaled values."""
    sd = float(np.std(z))
    q75, q25 = np.percentile(z, [75.0, 25.0])
    iqr = float(q75 - q25)
    scale = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * scale * z.size ** (-0.2)


def select_bandwidth(sample, grid_size=DEFAULT_GRID_SIZE):
    """Rule-of-thumb bandwidth, clamped away from the grid resolution.

    Uses 0.9 * min(sd, iqr/1.34) * n^(-1/5) on the unit-rescaled sample and
    clips the result into (grid spacing, 1/2). A dispersion-free sample
    falls back to MIN_BANDWIDTH with a warning.
    """
    if not isinstance(sample, RawSample):
        sample = RawSample(np.asarray(sample, dtype=float))
    grid_size = int(grid_size)
    z = np.sort(sample.unit_values())
    h = _silverman_rule(z)
    if h <= 0.0:
        warnings.warn(
            "sample has zero dispersion; falling back to the minimum bandwidth",
            stacklevel=2,
        )
        h = MIN_BANDWIDTH
    lo = 2.0 / (grid_size - 1)
    return float(np.clip(h, lo, MAX_BANDWIDTH))


def common_bandwidth(samples, grid_size=DEFAULT_GRID_SIZE):
    """Median of per-sample rule-of-thumb bandwidths.

    Sharing one bandwidth across a family of samples keeps the resulting
    densities comparable; per-sample bandwidths would add spurious
    day-to-day differences in spread.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rules = [select_bandwidth(s, grid_size=grid_size) for s in samples]
    return float(np.median(rules))
