"""Single change-point detection for sequences of densities.

Scans every admissible cut of a density sequence and scores it with a
statistic that combines two ingredients computed in Wasserstein-2
geometry: the squared difference of the two segments' Frechet variances,
and the squared sum of the "contamination" excesses obtained by measuring
each segment's dispersion around the other segment's barycenter. The cut
that maximizes the statistic estimates the change point; significance is
calibrated by permuting the sequence order.
"""

from dataclasses import dataclass

import numpy as np

from .wasserstein import QuantileFunction, quantile_from_density

__all__ = [
    "DensitySequence",
    "SegmentStats",
    "PooledScale",
    "ScanResult",
    "segment_stats",
    "pooled_scale",
    "scan_statistic",
    "permutation_pvalue",
    "detect_change_point",
]

DEFAULT_CUT = 0.1
SIGMA_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# Sequence container
# ---------------------------------------------------------------------------

@dataclass
class DensitySequence:
    """Time-ordered densities represented as rows of quantile values."""

    levels: np.ndarray
    quantiles: np.ndarray  # shape (n, level_count), rows nondecreasing

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        self.quantiles = np.asarray(self.quantiles, dtype=float)
        if self.levels.ndim != 1 or self.quantiles.ndim != 2:
            raise ValueError("levels must be 1-d and quantiles 2-d")
        if self.quantiles.shape[1] != self.levels.size:
            raise ValueError("each quantile row must match the level grid")
        if self.quantiles.shape[0] < 1:
            raise ValueError("sequence must contain at least one density")
        if np.any(np.diff(self.quantiles, axis=1) < 0):
            raise ValueError("quantile rows must be nondecreasing")

    @classmethod
    def from_quantile_functions(cls, quantile_functions):
        qs = list(quantile_functions)
        if not qs:
            raise ValueError("sequence must contain at least one density")
        levels = qs[0].levels
        for q in qs[1:]:
            if q.levels.shape != levels.shape or not np.array_equal(q.levels, levels):
                raise ValueError("all items must share one level grid")
        return cls(levels=levels, quantiles=np.vstack([q.values for q in qs]))

    @classmethod
    def from_densities(cls, densities, levels=None):
        qs = [quantile_from_density(d, levels=levels) for d in densities]
        return cls.from_quantile_functions(qs)

    def __len__(self):
        return self.quantiles.shape[0]

    def item(self, index):
        return QuantileFunction(levels=self.levels, values=self.quantiles[index])

    def reversed(self):
        return DensitySequence(levels=self.levels, quantiles=self.quantiles[::-1].copy())

    def permuted(self, order):
        return DensitySequence(levels=self.levels, quantiles=self.quantiles[order])


# ---------------------------------------------------------------------------
# Result types
# ---------------------------------------------------------------------------

@dataclass
class SegmentStats:
    """Per-cut segment summaries.

    v1/v2 are the segments' own Frechet variances, v1c/v2c the
    contaminated variants measured around the other segment's mean.
    """

    k: float
    cut_index: int
    v1: float
    v2: float
    v1c: float
    v2c: float
    mu1: QuantileFunction
    mu2: QuantileFunction


@dataclass
class PooledScale:
    """Whole-sequence barycenter, variance and scale of the statistic."""

    sigma_sq: float
    mu_hat: QuantileFunction
    v_hat: float

    def __post_init__(self):
        if self.sigma_sq < 0:
            raise ValueError("sigma_sq must be nonnegative")


@dataclass
class ScanResult:
    """Statistic curve over the cut interval and the located maximum."""

    ks: np.ndarray
    stats: np.ndarray
    k_hat: float
    tau_hat: int
    max_stat: float
    c: float
    n: int
    degenerate: bool = False
    p_value: float | None = None
    permutations: int = 0
    seed: int | None = None

    @property
    def curve(self):
        return list(zip(self.ks.tolist(), self.stats.tolist()))


# ---------------------------------------------------------------------------
# Core computations
# ---------------------------------------------------------------------------

def _cut_index(n, k):
    # Integer part of n*k, with a tolerance so that k = m/n recovers m.
    return int(np.floor(n * k + 1e-9))


def _cut_range(n, c):
    c = float(c)
    if not (0.0 < c < 0.5):
        raise ValueError(f"cut parameter must satisfy 0 < c < 1/2, got {c}")
    if n * c < 2.0 - 1e-9:
        raise ValueError(
            f"sequence of length {n} is too short for cut parameter {c}: "
            "need n*c >= 2 so both segments hold at least two items"
        )
    lo = int(np.ceil(n * c - 1e-9))
    hi = int(np.floor(n * (1.0 - c) + 1e-9))
    return lo, hi


def _segment_fields(quantiles, m):
    """Definitional segment statistics at integer cut m."""
    left = quantiles[:m]
    right = quantiles[m:]
    mu1 = left.mean(axis=0)
    mu2 = right.mean(axis=0)
    v1 = float(((left - mu1) ** 2).mean(axis=1).mean())
    v2 = float(((right - mu2) ** 2).mean(axis=1).mean())
    v1c = float(((left - mu2) ** 2).mean(axis=1).mean())
    v2c = float(((right - mu1) ** 2).mean(axis=1).mean())
    return mu1, mu2, v1, v2, v1c, v2c


def segment_stats(sequence, k, c=None):
    """Frechet variances of the two segments split at fraction k.

    Means are the segments' quantile barycenters; v1/v2 average squared
    distances to a segment's own mean and v1c/v2c to the other segment's
    mean. When the cut interval parameter `c` is given, k is validated
    against [c, 1-c].
    """
    n = len(sequence)
    k = float(k)
    if c is not None:
        lo, hi = _cut_range(n, c)
        m = _cut_index(n, k)
        if not lo <= m <= hi:
            raise ValueError(f"cut fraction {k} falls outside [c, 1-c] = [{c}, {1 - c}]")
    else:
        m = _cut_index(n, k)
        if not 1 <= m <= n - 1:
            raise ValueError(f"cut fraction {k} leaves an empty segment (n={n})")
    mu1, mu2, v1, v2, v1c, v2c = _segment_fields(sequence.quantiles, m)
    return SegmentStats(
        k=k,
        cut_index=m,
        v1=v1,
        v2=v2,
        v1c=v1c,
        v2c=v2c,
        mu1=QuantileFunction(levels=sequence.levels, values=mu1),
        mu2=QuantileFunction(levels=sequence.levels, values=mu2),
    )


def pooled_scale(sequence, sigma_literal=False):
    """Whole-sequence barycenter, variance, and statistic scale.

    The scale defaults to the variance of the squared distances around the
    pooled barycenter (fourth moment minus squared variance). With
    ``sigma_literal=True`` the squared variance is replaced by the variance
    itself, an alternative normalization that mixes squared and fourth-power
    units and can go negative; negative values are clamped to zero.
    """
    n = len(sequence)
    if n < 2:
        raise ValueError(f"need at least two densities, got {n}")
    quantiles = sequence.quantiles
    mu = quantiles.mean(axis=0)
    sq_dists = ((quantiles - mu) ** 2).mean(axis=1)
    v_hat = float(sq_dists.mean())
    if sigma_literal:
        raw = float((sq_dists ** 2).mean()) - v_hat
    else:
        raw = float((sq_dists ** 2).mean()) - v_hat ** 2
    return PooledScale(
        sigma_sq=max(raw, 0.0),
        mu_hat=QuantileFunction(levels=sequence.levels, values=mu),
        v_hat=v_hat,
    )


def _statistic_value(k, v1, v2, v1c, v2c, sigma_sq):
    between = v1c - v1 + v2c - v2
    return k * (1.0 - k) / sigma_sq * ((v1 - v2) ** 2 + between ** 2)


def scan_statistic(sequence, c=DEFAULT_CUT, sigma_literal=False,
                   sigma_floor=SIGMA_FLOOR):
    """Evaluate the change-point statistic at every admissible integer cut.

    Returns the statistic curve over cuts m in [ceil(n*c), floor(n*(1-c))],
    the argmax cut fraction (ties broken toward the smallest index), and
    the estimated change-point index. If the pooled scale falls below
    ``sigma_floor`` the sequence carries no usable dispersion: the curve is
    defined as identically zero and the result is flagged degenerate.
    """
    n = len(sequence)
    lo, hi = _cut_range(n, c)
    scale = pooled_scale(sequence, sigma_literal=sigma_literal)

    cuts = np.arange(lo, hi + 1)
    ks = cuts / n
    if scale.sigma_sq < sigma_floor:
        stats = np.zeros(cuts.size)
        return ScanResult(
            ks=ks, stats=stats, k_hat=float(ks[0]), tau_hat=int(cuts[0]),
            max_stat=0.0, c=float(c), n=n, degenerate=True,
        )

    stats = np.empty(cuts.size)
    for i, m in enumerate(cuts):
        _, _, v1, v2, v1c, v2c = _segment_fields(sequence.quantiles, int(m))
        stats[i] = _statistic_value(ks[i], v1, v2, v1c, v2c, scale.sigma_sq)

    best = int(np.argmax(stats))
    return ScanResult(
        ks=ks, stats=stats, k_hat=float(ks[best]), tau_hat=int(cuts[best]),
        max_stat=float(stats[best]), c=float(c), n=n, degenerate=False,
    )


def _max_stat_fast(quantiles, row_sq, order, cuts, ks, sigma_sq):
    """Maximum of the statistic curve for one row ordering.

    Uses prefix sums over the reordered rows, so one permutation costs
    O(n * levels) instead of O(cuts * n * levels). Agrees with the
    definitional per-cut evaluation to within accumulated rounding, far
    tighter than permutation calibration can resolve.
    """
    n = quantiles.shape[0]
    level_count = quantiles.shape[1]
    cum = np.cumsum(quantiles[order], axis=0)
    cum_sq = np.cumsum(row_sq[order])
    total = cum[-1]
    total_sq = cum_sq[-1]

    m = cuts[:, None].astype(float)
    mu1 = cum[cuts - 1] / m
    mu2 = (total - cum[cuts - 1]) / (n - m)
    v1 = np.maximum(
        (cum_sq[cuts - 1] / cuts - (mu1 ** 2).sum(axis=1)) / level_count, 0.0
    )
    v2 = np.maximum(
        ((total_sq - cum_sq[cuts - 1]) / (n - cuts) - (mu2 ** 2).sum(axis=1))
        / level_count,
        0.0,
    )
    gap = ((mu1 - mu2) ** 2).sum(axis=1) / level_count
    stats = ks * (1.0 - ks) / sigma_sq * ((v1 - v2) ** 2 + 4.0 * gap ** 2)
    return float(stats.max())


def permutation_pvalue(sequence, c=DEFAULT_CUT, permutations=200, seed=0,
                       sigma_literal=False, sigma_floor=SIGMA_FLOOR):
    """Permutation p-value for the maximum of the statistic curve.

    Each replicate applies a seeded uniform random permutation to the
    sequence order and rescans; the p-value is
    (1 + #{replicates >= observed}) / (permutations + 1). The permutation
    stream is drawn up front from the seed, so results do not depend on
    evaluation order. A degenerate pooled scale yields p = 1.
    """
    permutations = int(permutations)
    if permutations < 1:
        raise ValueError(f"need at least one permutation, got {permutations}")
    n = len(sequence)
    lo, hi = _cut_range(n, c)

    # The pooled barycenter and scale are order-invariant, so they are
    # shared by every permutation replicate.
    scale = pooled_scale(sequence, sigma_literal=sigma_literal)
    if scale.sigma_sq < sigma_floor:
        return 1.0

    quantiles = sequence.quantiles
    row_sq = (quantiles ** 2).sum(axis=1)
    cuts = np.arange(lo, hi + 1)
    ks = cuts / n

    identity = np.arange(n)
    observed = _max_stat_fast(quantiles, row_sq, identity, cuts, ks, scale.sigma_sq)

    rng = np.random.default_rng(seed)
    orders = [rng.permutation(n) for _ in range(permutations)]
    exceed = sum(
        1
        for order in orders
        if _max_stat_fast(quantiles, row_sq, order, cuts, ks, scale.sigma_sq) >= observed
    )
    return (1.0 + exceed) / (permutations + 1.0)


def detect_change_point(sequence, c=DEFAULT_CUT, permutations=200, seed=0,
                        sigma_literal=False, sigma_floor=SIGMA_FLOOR):
    """Scan for the change point and attach a permutation p-value.

    With ``permutations=0`` the scan runs without significance calibration
    and the p-value stays None.
    """
    result = scan_statistic(
        sequence, c=c, sigma_literal=sigma_literal, sigma_floor=sigma_floor
    )
    result.seed = seed
    if permutations:
        result.permutations = int(permutations)
        if result.degenerate:
            result.p_value = 1.0
        else:
            result.p_value = permutation_pvalue(
                sequence, c=c, permutations=permutations, seed=seed,
                sigma_literal=sigma_literal, sigma_floor=sigma_floor,
            )
    return result
