"""Change-point detection for time series of probability densities.

The library couples a boundary-corrected kernel density estimator for
samples on a compact support with Wasserstein-2 geometry on the quantile
scale, and scans a sequence of daily densities for the cut that maximizes
a Frechet mean/variance contrast statistic. A data pipeline turns
cumulative case and death series into origin-aligned mortality-rate
panels so the whole analysis runs end to end from raw CSV files.
"""

__version__ = "0.1.0"

from .kde import (
    DensityEstimate,
    RawSample,
    SupportInterval,
    boundary_weight,
    common_bandwidth,
    estimate_density,
    get_kernel,
    select_bandwidth,
)
from .wasserstein import (
    DegenerateDensityError,
    FrechetSummary,
    QuantileFunction,
    density_from_quantile,
    frechet_mean,
    frechet_summary,
    frechet_variance,
    midpoint_levels,
    quantile_from_density,
    w2_distance,
)
from .changepoint import (
    DensitySequence,
    PooledScale,
    ScanResult,
    SegmentStats,
    detect_change_point,
    permutation_pvalue,
    pooled_scale,
    scan_statistic,
    segment_stats,
)
from .pipeline import (
    AlignedPanel,
    CountryRecord,
    IngestionError,
    ParseError,
    QuantileTableRow,
    align_origin,
    compute_mortality,
    continent_mortality_series,
    continent_quantile_table,
    daily_cross_section,
    estimate_daily_densities,
    load_cases,
)
from .simulate import BetaFamily, SyntheticSpec, generate_panel

__all__ = [
    "__version__",
    "AlignedPanel",
    "BetaFamily",
    "CountryRecord",
    "DegenerateDensityError",
    "DensityEstimate",
    "DensitySequence",
    "FrechetSummary",
    "IngestionError",
    "ParseError",
    "PooledScale",
    "QuantileFunction",
    "QuantileTableRow",
    "RawSample",
    "ScanResult",
    "SegmentStats",
    "SupportInterval",
    "SyntheticSpec",
    "align_origin",
    "boundary_weight",
    "common_bandwidth",
    "compute_mortality",
    "continent_mortality_series",
    "continent_quantile_table",
    "daily_cross_section",
    "density_from_quantile",
    "detect_change_point",
    "estimate_daily_densities",
    "estimate_density",
    "frechet_mean",
    "frechet_summary",
    "frechet_variance",
    "generate_panel",
    "get_kernel",
    "load_cases",
    "midpoint_levels",
    "permutation_pvalue",
    "pooled_scale",
    "quantile_from_density",
    "scan_statistic",
    "segment_stats",
    "select_bandwidth",
    "w2_distance",
]
