"""Acceptance suite: one test per release criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL
lines. Criterion 7 replays the full pipeline on an archival data snapshot
and is skipped (with a note) when no snapshot is available; its findings
are reported rather than asserted.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid
from scipy.stats import beta as beta_dist

import wasserscan as ws
from wasserscan.kde import get_kernel
from wasserscan.pipeline import estimate_daily_densities
from wasserscan.wasserstein import midpoint_levels

REPO_ROOT = Path(__file__).resolve().parents[1]


def report(num, name, ok, detail=""):
    print(f"\nACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


# ---------------------------------------------------------------------------
# 1. Density normalization and boundary correction
# ---------------------------------------------------------------------------

def _uncorrected_reference(values, h, grid_size):
    kernel = get_kernel("epanechnikov")
    grid = np.linspace(0.0, 1.0, grid_size)
    num = kernel.density((grid[:, None] - np.sort(values)[None, :]) / h).sum(axis=1)
    return grid, num / np.trapezoid(num, grid)


def test_criterion_1_density_normalization():
    rng = np.random.default_rng(101)
    shapes = [(1, 20), (20, 1), (2, 2), (1, 1), (0.6, 0.6)]
    worst_integral = 0.0
    worst_interior = 0.0
    for trial in range(100):
        n = int(rng.integers(50, 5001))
        h = float(rng.uniform(0.015, 0.45))
        interior_case = trial % 4 == 0
        if interior_case and h < 0.24:
            values = 2 * h + (1 - 4 * h) * rng.beta(2, 2, n)
        else:
            interior_case = False
            values = rng.beta(*shapes[trial % len(shapes)], n)
        d = ws.estimate_density(ws.RawSample(values), bandwidth=h, grid_size=1001)

        integral = np.trapezoid(d.values, d.grid)
        worst_integral = max(worst_integral, abs(integral - 1.0))
        assert d.values.min() >= 0.0

        if interior_case:
            grid, reference = _uncorrected_reference(values, h, 1001)
            inner = (grid >= 2 * h) & (grid <= 1 - 2 * h)
            gap = np.abs(d.values[inner] - reference[inner]).max()
            worst_interior = max(worst_interior, gap)

    ok = worst_integral <= 1e-6 and worst_interior <= 1e-9
    report(1, "density normalization and boundary correction", ok,
           f"max |integral-1|={worst_integral:.2e}, "
           f"max interior gap={worst_interior:.2e} over 100 samples")


# ---------------------------------------------------------------------------
# 2. Wasserstein oracle equivalence and metric axioms
# ---------------------------------------------------------------------------

GRID = np.linspace(0.0, 1.0, 1001)


def _random_density(rng):
    values = 0.05 * np.ones_like(GRID)
    for _ in range(rng.integers(1, 4)):
        a, b = rng.uniform(1.5, 9, size=2)
        values += rng.uniform(0.3, 1.5) * beta_dist.pdf(GRID, a, b)
    return ws.DensityEstimate(grid=GRID, values=values / np.trapezoid(values, GRID))


def _oracle_w2(d1, d2, factor=10):
    fine = midpoint_levels(1000 * factor)
    qs = []
    for d in (d1, d2):
        cdf = cumulative_trapezoid(d.values, d.grid, initial=0.0)
        cdf /= cdf[-1]
        qs.append(np.interp(fine, cdf, d.grid))
    return float(np.sqrt(np.mean((qs[0] - qs[1]) ** 2)))


def test_criterion_2_wasserstein_oracle():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(50):
        d1, d2 = _random_density(rng), _random_density(rng)
        got = ws.w2_distance(ws.quantile_from_density(d1), ws.quantile_from_density(d2))
        worst = max(worst, abs(got - _oracle_w2(d1, d2)))
    axioms_ok = True
    for _ in range(100):
        qa, qb, qc = (ws.quantile_from_density(_random_density(rng)) for _ in range(3))
        dab, dba = ws.w2_distance(qa, qb), ws.w2_distance(qb, qa)
        axioms_ok &= dab == dba and dab >= 0.0
        axioms_ok &= dab <= ws.w2_distance(qa, qc) + ws.w2_distance(qb, qc) + 1e-9
    ok = worst <= 1e-3 and axioms_ok
    report(2, "Wasserstein oracle equivalence", ok,
           f"max |d - oracle|={worst:.2e} over 50 pairs; axioms on 100 triples: {axioms_ok}")


# ---------------------------------------------------------------------------
# 3. Frechet mean optimality
# ---------------------------------------------------------------------------

def test_criterion_3_frechet_mean_optimality():
    rng = np.random.default_rng(303)
    failures = 0
    for _ in range(20):
        count = int(rng.integers(5, 21))
        qs = [ws.quantile_from_density(_random_density(rng)) for _ in range(count)]
        stacked = np.vstack([q.values for q in qs])
        mean = ws.frechet_mean(qs)

        def objective(candidate_values):
            return float(((stacked - candidate_values) ** 2).mean())

        best = objective(mean.values)
        candidates = [q.values for q in qs]
        for _ in range(100):
            noise = rng.normal(0, 0.02, size=mean.values.size)
            candidates.append(np.sort(np.clip(mean.values + noise, 0, 1)))
        if any(best > objective(c) for c in candidates):
            failures += 1
    report(3, "Frechet mean optimality", failures == 0,
           f"{failures} of 20 sets had a better candidate than the quantile average")


# ---------------------------------------------------------------------------
# 4. Statistic identities on random sequences
# ---------------------------------------------------------------------------

ACCEPT_LEVELS = midpoint_levels(400)


def _random_sequence(rng, n=150):
    rows = []
    for _ in range(n):
        a, b = rng.uniform(1.5, 8, size=2)
        values = beta_dist.ppf(ACCEPT_LEVELS, a, b)
        rows.append(np.sort(np.clip(values + rng.uniform(-0.02, 0.02), 0, 1)))
    return ws.DensitySequence(levels=ACCEPT_LEVELS, quantiles=np.vstack(rows))


def test_criterion_4_statistic_identities():
    rng = np.random.default_rng(404)
    worst_dom = 0.0       # contamination dominance violation
    worst_rev = 0.0       # reversal symmetry gap
    worst_recompute = 0.0  # scan vs segment_stats/pooled_scale recomputation
    negatives = 0
    for _ in range(20):
        seq = _random_sequence(rng)
        n = len(seq)
        res = ws.scan_statistic(seq, c=0.1)
        negatives += int(np.any(res.stats < 0))

        scale = ws.pooled_scale(seq)
        for k, stat in zip(res.ks, res.stats):
            st = ws.segment_stats(seq, k)
            worst_dom = max(worst_dom, st.v1 - st.v1c, st.v2 - st.v2c)
            recomputed = (
                k * (1 - k) / scale.sigma_sq
                * ((st.v1 - st.v2) ** 2 + (st.v1c - st.v1 + st.v2c - st.v2) ** 2)
            )
            worst_recompute = max(worst_recompute, abs(stat - recomputed))

        rev = ws.scan_statistic(seq.reversed(), c=0.1)
        rev_map = dict(zip(np.rint(rev.ks * n).astype(int).tolist(), rev.stats))
        for m, stat in zip(np.rint(res.ks * n).astype(int), res.stats):
            if n - m in rev_map:
                worst_rev = max(worst_rev, abs(stat - rev_map[n - m]))

    ok = (worst_dom <= 1e-9 and negatives == 0 and worst_rev <= 1e-9
          and worst_recompute <= 1e-12)
    report(4, "statistic identities", ok,
           f"dominance slack={worst_dom:.2e}, reversal gap={worst_rev:.2e}, "
           f"recompute gap={worst_recompute:.2e}, negative curves={negatives}")


# ---------------------------------------------------------------------------
# 5. Planted change-point recovery
# ---------------------------------------------------------------------------

def _replicate_detection(child_seq, family_a, family_b, change_index, perm_seed):
    rng = np.random.default_rng(child_seq)
    spec = ws.SyntheticSpec(family_a, family_b, change_index=change_index,
                            days=150, draws=189, seed=0)
    panel = ws.generate_panel(spec, rng=rng)
    daily = estimate_daily_densities(panel, grid_size=251, level_count=250)
    return ws.detect_change_point(daily.sequence, c=0.1, permutations=200,
                                  seed=perm_seed)


def test_criterion_5_planted_changepoint_recovery():
    started = time.perf_counter()
    children = np.random.SeedSequence(55005).spawn(50)
    hits = 0
    detected_ps = []
    for rep, child in enumerate(children):
        res = _replicate_detection(child, ws.BetaFamily(2, 8), ws.BetaFamily(2, 5),
                                   104, perm_seed=rep)
        if abs(res.tau_hat - 104) <= 3:
            hits += 1
            detected_ps.append(res.p_value)
    p_ok = all(p <= 0.01 for p in detected_ps)
    ok = hits >= 45 and p_ok
    report(5, "planted change-point recovery", ok,
           f"{hits}/50 within +-3 of 104, max p={max(detected_ps):.4f} "
           f"({time.perf_counter() - started:.0f}s)")


# ---------------------------------------------------------------------------
# 6. Null calibration
# ---------------------------------------------------------------------------

def test_criterion_6_null_calibration():
    started = time.perf_counter()
    children = np.random.SeedSequence(66006).spawn(20)
    rejections = 0
    for rep, child in enumerate(children):
        res = _replicate_detection(child, ws.BetaFamily(2, 5), ws.BetaFamily(2, 5),
                                   75, perm_seed=1000 + rep)
        if res.p_value <= 0.05:
            rejections += 1
    ok = rejections <= 3
    report(6, "null calibration", ok,
           f"{rejections}/20 nulls rejected at level 0.05 "
           f"({time.perf_counter() - started:.0f}s)")


# ---------------------------------------------------------------------------
# 7. Paper-scale reproduction (best effort, report-only)
# ---------------------------------------------------------------------------

def _find_snapshot():
    candidates = []
    env = os.environ.get("WASSERSCAN_DATA_DIR")
    if env:
        candidates.append(Path(env))
    candidates.append(REPO_ROOT / "data")
    for base in candidates:
        for conf_name, death_name in (
            ("confirmed.csv", "deaths.csv"),
            ("time_series_covid19_confirmed_global.csv",
             "time_series_covid19_deaths_global.csv"),
        ):
            confirmed = base / conf_name
            deaths = base / death_name
            if confirmed.exists() and deaths.exists():
                continents = base / "continents.csv"
                if not continents.exists():
                    continents = REPO_ROOT / "data" / "continents.csv"
                return confirmed, deaths, continents
    return None


def test_criterion_7_archival_reproduction():
    snapshot = _find_snapshot()
    if snapshot is None:
        pytest.skip(
            "no archival snapshot found (set WASSERSCAN_DATA_DIR or place "
            "confirmed.csv/deaths.csv under data/); criterion 7 is best-effort"
        )
    confirmed, deaths, continents = snapshot
    records = ws.load_cases(confirmed, deaths, continents)
    panel = ws.align_origin(records, threshold=30, window=150)
    daily = estimate_daily_densities(panel, grid_size=501, level_count=500)
    res = ws.detect_change_point(daily.sequence, c=0.1, permutations=200, seed=0)
    rows = ws.continent_quantile_table(panel, split_day=res.tau_hat)
    europe_after_90 = next(
        r.proportion for r in rows
        if r.continent == "Europe" and r.stage == "after" and r.percentile == 90
    )
    stats = ws.segment_stats(daily.sequence, res.k_hat)
    before = ws.density_from_quantile(stats.mu1, support=panel.support)
    after = ws.density_from_quantile(stats.mu2, support=panel.support)
    mode_before = before.grid_original()[np.argmax(before.values)]
    mode_after = after.grid_original()[np.argmax(after.values)]
    spread_before = ws.frechet_variance(
        [daily.sequence.item(i) for i in range(res.tau_hat)], stats.mu1
    )
    spread_after = ws.frechet_variance(
        [daily.sequence.item(i) for i in range(res.tau_hat, len(daily.sequence))],
        stats.mu2,
    )

    # Reported, not asserted: archival snapshots drift and the source
    # publication is internally inconsistent about the split day.
    print("\nACCEPTANCE 7 (archival reproduction): PASS (report only)")
    print(f"  countries x days: {panel.n_countries} x {panel.window} (expected ~189 x 150)")
    print(f"  detected index: {res.tau_hat} (expected within [95, 115]), "
          f"p={res.p_value:.4f}")
    print(f"  Europe after-split share at 90th pct: {europe_after_90:.4f} "
          f"(expected > 0.5)")
    print(f"  barycenter modes before/after: {mode_before:.4f} / {mode_after:.4f}")
    print(f"  segment dispersions before/after: {spread_before:.3e} / {spread_after:.3e}")
