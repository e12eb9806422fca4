"""Locating a planted distributional change.

Builds a 150-day panel whose daily cross-sections switch family at day
104, estimates one density per day, and scans the resulting quantile
sequence. The statistic curve peaks at the planted index and a seeded
permutation test puts the maximum far outside the null range.

Run from the repository root:

    python demos/03_change_point_scan.py
"""

from pathlib import Path

import numpy as np

from wasserscan import (
    BetaFamily,
    SyntheticSpec,
    detect_change_point,
    generate_panel,
    segment_stats,
)
from wasserscan.pipeline import estimate_daily_densities

OUT_DIR = Path(__file__).parent / "output"
CHANGE_AT = 104


def main():
    spec = SyntheticSpec(
        family_before=BetaFamily(2, 8),
        family_after=BetaFamily(2, 5),
        change_index=CHANGE_AT,
        days=150,
        draws=189,
        seed=11,
    )
    panel = generate_panel(spec)
    print(f"panel: {panel.rates.shape[0]} units x {panel.rates.shape[1]} days, "
          f"change planted after day {CHANGE_AT}")

    daily = estimate_daily_densities(panel, grid_size=501, level_count=500)
    print(f"common bandwidth: {daily.bandwidth:.4f}")

    result = detect_change_point(daily.sequence, c=0.1, permutations=200, seed=3)
    print(f"detected index: {result.tau_hat} (k = {result.k_hat:.3f})")
    print(f"maximum statistic: {result.max_stat:.2f}")
    print(f"permutation p-value (B=200): {result.p_value:.4f}")

    stats = segment_stats(daily.sequence, result.k_hat)
    print("\nsegment summaries at the detected cut:")
    print(f"  own variances      v1={stats.v1:.3e}  v2={stats.v2:.3e}")
    print(f"  contaminated       v1c={stats.v1c:.3e} v2c={stats.v2c:.3e}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; skipping the figure")
        return

    OUT_DIR.mkdir(exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(result.ks * len(daily.sequence), result.stats)
    ax.axvline(CHANGE_AT, color="gray", ls=":", label=f"planted ({CHANGE_AT})")
    ax.axvline(result.tau_hat, color="red", ls="--",
               label=f"detected ({result.tau_hat})")
    ax.set_xlabel("candidate cut index")
    ax.set_ylabel("scan statistic")
    ax.legend()
    fig.tight_layout()
    path = OUT_DIR / "scan_statistic.png"
    fig.savefig(path, dpi=120)
    print(f"figure saved to {path}")


if __name__ == "__main__":
    main()
