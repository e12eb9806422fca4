"""Command-line pipeline: ingest, densities, detect, report, simulate.

Commands communicate through the output directory: `ingest` (or
`simulate`) writes the aligned panel there, `densities` adds per-day
density and quantile grids, `detect` scans the quantile sequence for a
change point, and `report` tabulates continent composition around a split
day. Every command also writes a JSON manifest recording its
configuration, seed, headline results and timing. Outputs are plain CSV,
ready for any plotting tool.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .changepoint import DensitySequence, detect_change_point, segment_stats
from .kde import SupportInterval
from .pipeline import (
    IngestionError,
    ParseError,
    align_origin,
    continent_mortality_series,
    continent_quantile_table,
    estimate_daily_densities,
    load_cases,
    read_panel_csv,
    read_panel_matrix_csv,
    write_panel_csv,
    write_quantile_table_csv,
)
from .simulate import SyntheticSpec, generate_panel, parse_family
from .wasserstein import density_from_quantile

EXIT_OK = 0
EXIT_PARAMS = 2
EXIT_INGEST = 3
EXIT_DEGENERATE = 4


def _write_manifest(out_dir, command, config, results, elapsed):
    manifest = {
        "command": command,
        "config": config,
        "results": results,
        "timings": {"elapsed_seconds": elapsed},
    }
    path = Path(out_dir) / f"{command}_manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _read_manifest(out_dir, command):
    path = Path(out_dir) / f"{command}_manifest.json"
    if not path.exists():
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write_matrix_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _support_from_arg(value):
    if value is None:
        return None
    return SupportInterval(0.0, float(value))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_ingest(args):
    started = time.perf_counter()
    out = _out_dir(args)
    records = load_cases(args.confirmed, args.deaths, args.continents)
    panel = align_origin(
        records,
        min_days=args.min_days,
        support=_support_from_arg(args.support),
    )
    write_panel_csv(panel, out / "panel.csv")
    write_panel_csv(panel, out / "panel_deaths.csv", matrix=panel.deaths)
    write_panel_csv(panel, out / "panel_confirmed.csv", matrix=panel.confirmed)

    with open(out / "ingest_log.csv", "w", encoding="utf-8") as fh:
        fh.write("country,continent,status,reason,origin_date\n")
        for i, name in enumerate(panel.countries):
            fh.write(
                f"{name},{panel.continents[i]},included,,"
                f"{panel.origin_dates[i].isoformat()}\n"
            )
        for name, reason in panel.exclusions:
            fh.write(f"{name},,excluded,{reason},\n")

    results = {
        "countries": panel.n_countries,
        "days": panel.window,
        "excluded": len(panel.exclusions),
        "support_upper": panel.support.upper,
    }
    config = {
        "confirmed": str(args.confirmed),
        "deaths": str(args.deaths),
        "continents": str(args.continents),
        "min_days": args.min_days,
        "support": args.support,
    }
    _write_manifest(out, "ingest", config, results, time.perf_counter() - started)
    print(f"ingest: {panel.n_countries} countries x {panel.window} days -> {out}")
    return EXIT_OK


def cmd_densities(args):
    started = time.perf_counter()
    out = _out_dir(args)
    panel_path = out / "panel.csv"
    if not panel_path.exists():
        raise IngestionError(f"{panel_path} not found; run 'ingest' or 'simulate' first")
    panel = read_panel_csv(panel_path, support=_support_from_arg(args.support))

    daily = estimate_daily_densities(
        panel,
        kernel=args.kernel,
        bandwidth=args.bandwidth,
        grid_size=args.grid,
        level_count=args.levels,
    )

    # Densities are written on the original rate scale for plotting; the
    # quantile grids stay on the unit scale that detection consumes.
    grid = daily.densities[0].grid_original()
    _write_matrix_csv(
        out / "densities.csv",
        ["day"] + [f"{x:.8g}" for x in grid],
        ([float(day + 1)] + list(d.values_original()) for day, d in enumerate(daily.densities)),
    )
    levels = daily.sequence.levels
    _write_matrix_csv(
        out / "quantiles.csv",
        ["day"] + [f"{t:.8g}" for t in levels],
        ([float(day + 1)] + list(row) for day, row in enumerate(daily.sequence.quantiles)),
    )

    results = {
        "days": panel.window,
        "bandwidth": daily.bandwidth,
        "support_lower": panel.support.lower,
        "support_upper": panel.support.upper,
    }
    config = {
        "kernel": args.kernel,
        "bandwidth": args.bandwidth,
        "grid": args.grid,
        "levels": args.levels,
        "support": args.support,
    }
    _write_manifest(out, "densities", config, results, time.perf_counter() - started)
    print(f"densities: {panel.window} days, common bandwidth {daily.bandwidth:.4f}")
    return EXIT_OK


def _load_quantiles(out):
    path = out / "quantiles.csv"
    if not path.exists():
        raise IngestionError(f"{path} not found; run 'densities' first")
    raw = np.loadtxt(path, delimiter=",", skiprows=1)
    raw = np.atleast_2d(raw)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    levels = np.array([float(t) for t in header[1:]])
    return DensitySequence(levels=levels, quantiles=raw[:, 1:])


def cmd_detect(args):
    started = time.perf_counter()
    out = _out_dir(args)
    sequence = _load_quantiles(out)

    result = detect_change_point(
        sequence,
        c=args.cut,
        permutations=args.permutations,
        seed=args.seed,
        sigma_literal=args.sigma_literal,
    )

    _write_matrix_csv(
        out / "statistic_curve.csv",
        ["k", "cut_index", "statistic"],
        (
            [k, float(round(k * len(sequence))), t]
            for k, t in zip(result.ks, result.stats)
        ),
    )

    results = {
        "n": result.n,
        "cut": result.c,
        "tau_hat": result.tau_hat,
        "k_hat": result.k_hat,
        "max_stat": result.max_stat,
        "p_value": result.p_value,
        "permutations": result.permutations,
        "degenerate": result.degenerate,
    }
    config = {
        "cut": args.cut,
        "permutations": args.permutations,
        "seed": args.seed,
        "sigma_literal": args.sigma_literal,
    }

    if result.degenerate:
        _write_manifest(out, "detect", config, results, time.perf_counter() - started)
        print("detect: sequence has no usable dispersion (degenerate scan), p=1")
        return EXIT_DEGENERATE

    # Barycenter densities on both sides of the detected cut.
    dens_manifest = _read_manifest(out, "densities")
    support = None
    if dens_manifest is not None:
        res = dens_manifest.get("results", {})
        support = SupportInterval(res.get("support_lower", 0.0),
                                  res.get("support_upper", 1.0))
    stats = segment_stats(sequence, result.k_hat)
    before = density_from_quantile(stats.mu1, support=support)
    after = density_from_quantile(stats.mu2, support=support)
    _write_matrix_csv(
        out / "frechet_means.csv",
        ["x", "density_before", "density_after"],
        (
            [x, b, a]
            for x, b, a in zip(
                before.grid_original(), before.values_original(), after.values_original()
            )
        ),
    )

    _write_manifest(out, "detect", config, results, time.perf_counter() - started)
    pv = "n/a" if result.p_value is None else f"{result.p_value:.4f}"
    print(
        f"detect: change point at index {result.tau_hat} "
        f"(k={result.k_hat:.3f}, T={result.max_stat:.3f}, p={pv})"
    )
    return EXIT_OK


def cmd_report(args):
    started = time.perf_counter()
    out = _out_dir(args)
    panel_path = out / "panel.csv"
    if not panel_path.exists():
        raise IngestionError(f"{panel_path} not found; run 'ingest' first")
    panel = read_panel_csv(panel_path)
    for name, attr in (("panel_deaths.csv", "deaths"), ("panel_confirmed.csv", "confirmed")):
        path = out / name
        if path.exists():
            _, _, matrix = read_panel_matrix_csv(path)
            setattr(panel, attr, matrix)

    split_day = args.split_day
    if split_day is None:
        detect_manifest = _read_manifest(out, "detect")
        if detect_manifest is None:
            raise ValueError(
                "no --split-day given and no detect manifest found; "
                "run 'detect' first or pass --split-day"
            )
        split_day = int(detect_manifest["results"]["tau_hat"])

    rows = continent_quantile_table(panel, split_day)
    counts = {}
    for cont in panel.continents:
        counts[cont] = counts.get(cont, 0) + 1
    write_quantile_table_csv(rows, out / "quantile_table.csv", counts=counts)

    series_written = False
    if panel.deaths is not None and panel.confirmed is not None:
        series = continent_mortality_series(panel)
        labels = list(series)
        _write_matrix_csv(
            out / "continent_series.csv",
            ["day"] + labels,
            (
                [float(day + 1)] + [series[label][day] for label in labels]
                for day in range(panel.window)
            ),
        )
        series_written = True

    country_dir = out / "country_series"
    country_dir.mkdir(exist_ok=True)
    for i, name in enumerate(panel.countries):
        safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)
        _write_matrix_csv(
            country_dir / f"{safe}.csv",
            ["day", "rate"],
            ([float(day + 1), panel.rates[i, day]] for day in range(panel.window)),
        )

    results = {
        "split_day": split_day,
        "continent_series": series_written,
        "countries": panel.n_countries,
    }
    config = {"split_day": args.split_day}
    _write_manifest(out, "report", config, results, time.perf_counter() - started)
    print(f"report: quantile table at split day {split_day} -> {out}")
    return EXIT_OK


def cmd_simulate(args):
    started = time.perf_counter()
    out = _out_dir(args)
    family_a = parse_family(args.family_a)
    family_b = parse_family(args.family_b) if args.family_b else family_a

    panels = []
    rng = np.random.default_rng(args.seed)
    for rep in range(1, args.replicates + 1):
        spec = SyntheticSpec(
            family_before=family_a,
            family_after=family_b,
            change_index=args.change_index,
            days=args.days,
            draws=args.draws,
            seed=args.seed,
        )
        panel = generate_panel(spec, rng=rng)
        name = f"synthetic_panel_{rep:03d}.csv" if args.replicates > 1 else "panel.csv"
        write_panel_csv(panel, out / name)
        panels.append(name)

    truth = {
        "family_before": family_a.label(),
        "family_after": family_b.label(),
        "change_index": args.change_index,
        "is_null": family_a == family_b,
        "days": args.days,
        "draws": args.draws,
        "replicates": args.replicates,
        "seed": args.seed,
        "panels": panels,
    }
    with open(out / "ground_truth.json", "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")

    config = {
        "family_a": args.family_a,
        "family_b": args.family_b,
        "change_index": args.change_index,
        "days": args.days,
        "draws": args.draws,
        "replicates": args.replicates,
        "seed": args.seed,
    }
    _write_manifest(out, "simulate", config, {"panels": panels},
                    time.perf_counter() - started)
    print(f"simulate: {args.replicates} panel(s) of {args.draws} x {args.days} -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="wasserscan",
        description="Change-point detection for daily mortality-rate densities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="build the origin-aligned rate panel")
    p_ingest.add_argument("--confirmed", required=True, help="wide CSV of cumulative confirmed cases")
    p_ingest.add_argument("--deaths", required=True, help="wide CSV of cumulative deaths")
    p_ingest.add_argument("--continents", required=True, help="CSV mapping country,continent")
    p_ingest.add_argument("--min-days", type=int, default=None,
                          help="admit countries with at least this many observed days (default: the full window)")
    p_ingest.add_argument("--support", type=float, default=None,
                          help="fixed support upper bound (default: 1.05x the max rate)")
    p_ingest.add_argument("--out", required=True, help="output directory")
    p_ingest.set_defaults(func=cmd_ingest)

    p_dens = sub.add_parser("densities", help="estimate per-day densities and quantiles")
    p_dens.add_argument("--kernel", default="epanechnikov",
                        choices=["epanechnikov", "gaussian"])
    p_dens.add_argument("--bandwidth", type=float, default=None,
                        help="common bandwidth override on the unit support")
    p_dens.add_argument("--grid", type=int, default=1001, help="density grid size")
    p_dens.add_argument("--levels", type=int, default=1000, help="quantile level count")
    p_dens.add_argument("--support", type=float, default=None,
                        help="fixed support upper bound for the reloaded panel")
    p_dens.add_argument("--out", required=True, help="directory holding panel.csv")
    p_dens.set_defaults(func=cmd_densities)

    p_detect = sub.add_parser("detect", help="scan the density sequence for a change point")
    p_detect.add_argument("--cut", type=float, default=0.1,
                          help="cut parameter c bounding the scan to [c, 1-c]")
    p_detect.add_argument("--permutations", type=int, default=200,
                          help="permutation count for the p-value (0 disables)")
    p_detect.add_argument("--seed", type=int, default=0)
    p_detect.add_argument("--sigma-literal", action="store_true",
                          help="subtract the pooled variance itself (not its square) in the scale")
    p_detect.add_argument("--out", required=True, help="directory holding quantiles.csv")
    p_detect.set_defaults(func=cmd_detect)

    p_report = sub.add_parser("report", help="continent tables and plot series")
    p_report.add_argument("--split-day", type=int, default=None,
                          help="split day for the quantile table (default: detected change point)")
    p_report.add_argument("--out", required=True, help="directory holding panel.csv")
    p_report.set_defaults(func=cmd_report)

    p_sim = sub.add_parser("simulate", help="generate synthetic panels with a planted change")
    p_sim.add_argument("--family-a", default="beta:2,8", help="pre-change family, e.g. beta:2,8")
    p_sim.add_argument("--family-b", default=None,
                       help="post-change family (default: same as --family-a, a null panel)")
    p_sim.add_argument("--change-index", type=int, default=104)
    p_sim.add_argument("--days", type=int, default=150)
    p_sim.add_argument("--draws", type=int, default=189)
    p_sim.add_argument("--replicates", type=int, default=1)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, IngestionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
