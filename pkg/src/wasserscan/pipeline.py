"""Ingestion and panel construction for cumulative case/death series.

Reads wide-format time-series CSVs of cumulative confirmed and death
counts (one row per province or country, one column per calendar date),
aggregates to country level, cleans the inevitable downward revisions,
converts to mortality rates, and aligns every country to its own origin:
the first date with at least a threshold number of cumulative deaths.
The result is a rectangular countries-by-days rate panel whose daily
columns feed the density estimator.
"""

import csv
import datetime as dt
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .kde import RawSample, SupportInterval, common_bandwidth, estimate_density
from .wasserstein import midpoint_levels, quantile_from_density
from .changepoint import DensitySequence

__all__ = [
    "ParseError",
    "IngestionError",
    "CONTINENTS",
    "CountryRecord",
    "AlignedPanel",
    "QuantileTableRow",
    "load_cases",
    "compute_mortality",
    "align_origin",
    "daily_cross_section",
    "continent_quantile_table",
    "continent_mortality_series",
    "estimate_daily_densities",
    "read_panel_csv",
    "read_panel_matrix_csv",
    "write_panel_csv",
    "write_quantile_table_csv",
]

CONTINENTS = (
    "North America",
    "South America",
    "Europe",
    "Asia",
    "Oceania",
    "Africa",
)

DEFAULT_ORIGIN_THRESHOLD = 30
DEFAULT_WINDOW = 150

# Headroom above the largest observed rate so no sample sits exactly on
# the support boundary; rates cannot exceed 1, so the padding is capped.
SUPPORT_PADDING = 1.05


class ParseError(ValueError):
    """A malformed input file; carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        detail = message
        if path is not None:
            detail = f"{path}:{line}: {message}" if line is not None else f"{path}: {message}"
        super().__init__(detail)
        self.path = path
        self.line = line


class IngestionError(RuntimeError):
    """Ingestion cannot produce a usable panel."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class CountryRecord:
    """Cleaned cumulative series for one country."""

    name: str
    continent: str
    dates: list
    confirmed: np.ndarray
    deaths: np.ndarray

    def __post_init__(self):
        self.confirmed = np.asarray(self.confirmed, dtype=np.int64)
        self.deaths = np.asarray(self.deaths, dtype=np.int64)
        if not (len(self.dates) == self.confirmed.size == self.deaths.size):
            raise ValueError("dates, confirmed and deaths must have equal length")
        if np.any(self.confirmed < 0) or np.any(self.deaths < 0):
            raise ValueError("cumulative counts must be nonnegative")
        if np.any(np.diff(self.confirmed) < 0) or np.any(np.diff(self.deaths) < 0):
            raise ValueError("cumulative series must be nondecreasing after cleaning")
        if np.any(self.deaths > self.confirmed):
            raise ValueError("deaths must not exceed confirmed after cleaning")


@dataclass
class AlignedPanel:
    """Origin-aligned rate panel: one row per country, one column per day."""

    countries: list
    continents: list
    rates: np.ndarray
    origin_dates: list | None = None
    support: SupportInterval | None = None
    deaths: np.ndarray | None = None
    confirmed: np.ndarray | None = None
    exclusions: list = field(default_factory=list)

    def __post_init__(self):
        self.rates = np.asarray(self.rates, dtype=float)
        if self.rates.ndim != 2:
            raise ValueError("rates must be a 2-d matrix")
        if len(self.countries) != self.rates.shape[0]:
            raise ValueError("one rate row per country required")
        if len(self.continents) != len(self.countries):
            raise ValueError("one continent label per country required")
        if self.rates.size and (self.rates.min() < 0.0 or self.rates.max() > 1.0):
            raise ValueError("rates must lie within [0, 1]")
        if self.support is None:
            top = float(self.rates.max()) if self.rates.size else 0.0
            upper = min(1.0, SUPPORT_PADDING * top) if top > 0 else 1.0
            self.support = SupportInterval(0.0, upper)

    @property
    def n_countries(self):
        return self.rates.shape[0]

    @property
    def window(self):
        return self.rates.shape[1]


class QuantileTableRow(NamedTuple):
    continent: str
    stage: str  # "before" or "after"
    percentile: int
    proportion: float


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def _parse_date(text):
    return dt.datetime.strptime(text.strip(), "%m/%d/%y").date()


def _parse_count(text, path, line):
    text = text.strip()
    if not text:
        return 0
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"expected a numeric count, got {text!r}", path, line) from None
    if value < 0:
        raise ParseError(f"negative cumulative count {text!r}", path, line)
    return int(round(value))


def _read_wide_csv(path):
    """Country -> counts from a wide time-series CSV, provinces summed."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", path, 1) from None
        if len(header) < 5:
            raise ParseError(
                "expected province, country, latitude, longitude and date columns",
                path, 1,
            )
        try:
            dates = [_parse_date(col) for col in header[4:]]
        except ValueError as exc:
            raise ParseError(f"bad date column in header: {exc}", path, 1) from None
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise ParseError("date columns must be strictly increasing", path, 1)

        totals = {}
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"row has {len(row)} fields, header has {len(header)}",
                    path, reader.line_num,
                )
            country = row[1].strip()
            if not country:
                raise ParseError("missing country name", path, reader.line_num)
            counts = np.array(
                [_parse_count(cell, path, reader.line_num) for cell in row[4:]],
                dtype=np.int64,
            )
            if country in totals:
                totals[country] = totals[country] + counts
            else:
                totals[country] = counts
    return dates, totals


def _read_continent_map(path):
    mapping = {}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", path, 1) from None
        if [h.strip().lower() for h in header[:2]] != ["country", "continent"]:
            raise ParseError("expected header 'country,continent'", path, 1)
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise ParseError("expected two fields", path, reader.line_num)
            country = row[0].strip()
            continent = row[1].strip()
            if continent not in CONTINENTS:
                raise ParseError(
                    f"unknown continent {continent!r}; expected one of {CONTINENTS}",
                    path, reader.line_num,
                )
            mapping[country] = continent
    return mapping


def _clean_cumulative(confirmed, deaths):
    """Remove downward revisions and cap deaths at confirmed."""
    confirmed = np.maximum.accumulate(confirmed)
    deaths = np.maximum.accumulate(deaths)
    deaths = np.minimum(deaths, confirmed)
    return confirmed, deaths


def load_cases(confirmed_file, deaths_file, continent_map_file):
    """Read, aggregate, join and clean the two cumulative case files.

    Province rows are summed into their country. Countries are kept only
    when they appear in both files and in the continent map; the date axis
    is the intersection of the two files' date columns. Cumulative series
    are forced nondecreasing by running maximum and deaths are capped at
    confirmed.
    """
    conf_dates, conf_totals = _read_wide_csv(confirmed_file)
    death_dates, death_totals = _read_wide_csv(deaths_file)
    continents = _read_continent_map(continent_map_file)
    if not continents:
        raise IngestionError(f"continent map {continent_map_file} has no entries")

    common_dates = sorted(set(conf_dates) & set(death_dates))
    if not common_dates:
        raise IngestionError("confirmed and deaths files share no dates")
    conf_idx = [conf_dates.index(d) for d in common_dates]
    death_idx = [death_dates.index(d) for d in common_dates]

    common_countries = sorted(set(conf_totals) & set(death_totals))
    if not common_countries:
        raise IngestionError("confirmed and deaths files share no countries")
    only_one_file = (set(conf_totals) ^ set(death_totals))
    if only_one_file:
        warnings.warn(
            f"{len(only_one_file)} countries appear in only one case file "
            "and were dropped",
            stacklevel=2,
        )

    records = []
    unmapped = []
    for country in common_countries:
        continent = continents.get(country)
        if continent is None:
            unmapped.append(country)
            continue
        confirmed = conf_totals[country][conf_idx]
        deaths = death_totals[country][death_idx]
        confirmed, deaths = _clean_cumulative(confirmed, deaths)
        records.append(
            CountryRecord(
                name=country,
                continent=continent,
                dates=list(common_dates),
                confirmed=confirmed,
                deaths=deaths,
            )
        )
    if unmapped:
        warnings.warn(
            f"{len(unmapped)} countries missing from the continent map were "
            f"excluded (e.g. {unmapped[:3]})",
            stacklevel=2,
        )
    if not records:
        raise IngestionError("no countries survived the continent join")
    return records


# ---------------------------------------------------------------------------
# Mortality rates and alignment
# ---------------------------------------------------------------------------

def compute_mortality(record):
    """Cumulative deaths over cumulative confirmed, zero where undefined."""
    confirmed = record.confirmed.astype(float)
    deaths = record.deaths.astype(float)
    return np.divide(
        deaths, confirmed, out=np.zeros_like(deaths), where=confirmed > 0
    )


def align_origin(records, threshold=DEFAULT_ORIGIN_THRESHOLD, window=DEFAULT_WINDOW,
                 min_days=None, support=None):
    """Build the origin-aligned rate panel.

    A country's origin is the first date its cumulative deaths reach
    ``threshold``. Countries that never reach it are dropped, as are those
    observing fewer than ``min_days`` days from the origin on (default:
    the full ``window``). Countries admitted with fewer than ``window``
    observed days have their final rate carried forward so the panel stays
    rectangular.
    """
    if window < 1:
        raise ValueError(f"window must be positive, got {window}")
    if min_days is None:
        min_days = window
    if not 1 <= min_days <= window:
        raise ValueError(f"min_days must lie in [1, {window}], got {min_days}")

    names, conts, origins, rate_rows, death_rows, conf_rows = [], [], [], [], [], []
    exclusions = []
    for rec in records:
        reached = np.nonzero(rec.deaths >= threshold)[0]
        if reached.size == 0:
            exclusions.append((rec.name, f"never reached {threshold} deaths"))
            continue
        start = int(reached[0])
        available = len(rec.dates) - start
        if available < min_days:
            exclusions.append(
                (rec.name, f"only {available} days observed after origin")
            )
            continue
        span = min(window, available)
        rates = compute_mortality(rec)[start:start + span]
        deaths = rec.deaths[start:start + span].astype(float)
        confirmed = rec.confirmed[start:start + span].astype(float)
        if span < window:
            pad = window - span
            rates = np.concatenate([rates, np.full(pad, rates[-1])])
            deaths = np.concatenate([deaths, np.full(pad, deaths[-1])])
            confirmed = np.concatenate([confirmed, np.full(pad, confirmed[-1])])
        names.append(rec.name)
        conts.append(rec.continent)
        origins.append(rec.dates[start])
        rate_rows.append(rates)
        death_rows.append(deaths)
        conf_rows.append(confirmed)

    if not names:
        raise IngestionError(
            f"no country reached {threshold} deaths with {min_days} observed days"
        )
    if exclusions:
        warnings.warn(
            f"{len(exclusions)} countries excluded during alignment",
            stacklevel=2,
        )
    return AlignedPanel(
        countries=names,
        continents=conts,
        rates=np.vstack(rate_rows),
        origin_dates=origins,
        support=support,
        deaths=np.vstack(death_rows),
        confirmed=np.vstack(conf_rows),
        exclusions=exclusions,
    )


def daily_cross_section(panel, day):
    """One day's rates across countries, as a sample on the panel support."""
    if not 1 <= day <= panel.window:
        raise ValueError(f"day must lie in [1, {panel.window}], got {day}")
    return RawSample(values=panel.rates[:, day - 1], support=panel.support)


# ---------------------------------------------------------------------------
# Continent summaries
# ---------------------------------------------------------------------------

def _percentile_threshold(values, percentile, interpolate):
    if interpolate:
        return float(np.percentile(values, percentile))
    n = values.size
    rank = int(np.ceil(percentile * n / 100.0))
    rank = min(max(rank, 1), n)
    return float(np.sort(values)[rank - 1])


def continent_quantile_table(panel, split_day, percentiles=(5, 10, 90, 95),
                             interpolate=False):
    """Average continent shares inside the daily rate tails.

    For each day the cross-section's percentile thresholds are computed;
    countries strictly below a lower-tail threshold (5th, 10th) or strictly
    above an upper-tail one (90th, 95th) form that day's tail, and the
    continent composition of the tail is averaged over the days before the
    split (1..split_day) and after it (split_day+1..window).
    """
    if not 1 <= split_day < panel.window:
        raise ValueError(
            f"split_day must lie in [1, {panel.window - 1}], got {split_day}"
        )
    percentiles = sorted(int(p) for p in percentiles)
    if any(not 0 < p < 100 for p in percentiles):
        raise ValueError("percentiles must lie strictly between 0 and 100")

    labels = list(CONTINENTS) + sorted(set(panel.continents) - set(CONTINENTS))
    membership = np.array([[c == label for c in panel.continents] for label in labels])

    shares = {(stage, p): [] for stage in ("before", "after") for p in percentiles}
    empty_days = 0
    for day in range(1, panel.window + 1):
        stage = "before" if day <= split_day else "after"
        values = panel.rates[:, day - 1]
        for p in percentiles:
            thr = _percentile_threshold(values, p, interpolate)
            in_tail = values < thr if p < 50 else values > thr
            count = int(in_tail.sum())
            if count == 0:
                empty_days += 1
                shares[(stage, p)].append(np.zeros(len(labels)))
            else:
                shares[(stage, p)].append(membership[:, in_tail].sum(axis=1) / count)
    if empty_days:
        warnings.warn(
            f"{empty_days} day/percentile tails were empty and contributed zeros",
            stacklevel=2,
        )

    rows = []
    for i, label in enumerate(labels):
        for p in percentiles:
            for stage in ("before", "after"):
                avg = float(np.mean([s[i] for s in shares[(stage, p)]]))
                rows.append(QuantileTableRow(label, stage, p, avg))
    return rows


def continent_mortality_series(panel):
    """Aggregate mortality per continent: total deaths over total confirmed.

    Requires the aligned deaths and confirmed matrices, which ingestion
    attaches; panels reloaded from a rates-only CSV cannot provide this.
    """
    if panel.deaths is None or panel.confirmed is None:
        raise ValueError("panel lacks the aligned deaths/confirmed matrices")
    labels = [c for c in CONTINENTS if c in set(panel.continents)]
    extra = sorted(set(panel.continents) - set(CONTINENTS))
    series = {}
    for label in labels + extra:
        mask = np.array([c == label for c in panel.continents])
        deaths = panel.deaths[mask].sum(axis=0)
        confirmed = panel.confirmed[mask].sum(axis=0)
        series[label] = np.divide(
            deaths, confirmed, out=np.zeros_like(deaths), where=confirmed > 0
        )
    return series


# ---------------------------------------------------------------------------
# Densities for every panel day
# ---------------------------------------------------------------------------

class DailyDensityResult(NamedTuple):
    densities: list
    sequence: DensitySequence
    bandwidth: float


def estimate_daily_densities(panel, kernel="epanechnikov", bandwidth=None,
                             grid_size=1001, level_count=1000):
    """Estimate one density and quantile function per panel day.

    All days share a single bandwidth (the median of the per-day
    rule-of-thumb values unless one is supplied) so day-to-day differences
    in the densities reflect the data rather than the smoother.
    """
    samples = [daily_cross_section(panel, day) for day in range(1, panel.window + 1)]
    flat_days = [i + 1 for i, s in enumerate(samples) if np.ptp(s.values) == 0.0]
    if flat_days:
        warnings.warn(
            f"{len(flat_days)} day(s) hold a single repeated rate (e.g. day "
            f"{flat_days[0]}); their densities degenerate to one kernel bump",
            stacklevel=2,
        )
    if bandwidth is None:
        bandwidth = common_bandwidth(samples, grid_size=grid_size)
    densities = [
        estimate_density(s, kernel=kernel, bandwidth=bandwidth, grid_size=grid_size)
        for s in samples
    ]
    levels = midpoint_levels(level_count)
    quantiles = [quantile_from_density(d, levels=levels) for d in densities]
    sequence = DensitySequence.from_quantile_functions(quantiles)
    return DailyDensityResult(densities=densities, sequence=sequence,
                              bandwidth=float(bandwidth))


# ---------------------------------------------------------------------------
# Panel serialization
# ---------------------------------------------------------------------------

def write_panel_csv(panel, path, matrix=None):
    """Write a panel matrix as country, continent, day_1..day_W rows.

    ``matrix`` defaults to the rate matrix; pass ``panel.deaths`` or
    ``panel.confirmed`` to serialize the aligned cumulative counts in the
    same layout.
    """
    values = panel.rates if matrix is None else np.asarray(matrix)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["country", "continent"] + [f"day_{j + 1}" for j in range(values.shape[1])]
        )
        for i, name in enumerate(panel.countries):
            writer.writerow(
                [name, panel.continents[i]] + [f"{v:.12g}" for v in values[i]]
            )


def read_panel_matrix_csv(path):
    """Raw (countries, continents, matrix) from a panel-layout CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", path, 1) from None
        if header[:2] != ["country", "continent"]:
            raise ParseError("expected header 'country,continent,day_1,...'", path, 1)
        names, conts, rows = [], [], []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"row has {len(row)} fields, header has {len(header)}",
                    path, reader.line_num,
                )
            names.append(row[0])
            conts.append(row[1])
            try:
                rows.append([float(v) for v in row[2:]])
            except ValueError:
                raise ParseError("non-numeric value", path, reader.line_num) from None
    if not rows:
        raise ParseError("panel has no data rows", path, 2)
    return names, conts, np.array(rows)


def read_panel_csv(path, support=None):
    """Read a rate panel written by :func:`write_panel_csv`."""
    names, conts, rates = read_panel_matrix_csv(path)
    return AlignedPanel(countries=names, continents=conts, rates=rates, support=support)


def write_quantile_table_csv(rows, path, counts=None):
    """Serialize quantile-table rows, one line per continent.

    Column pairs follow the percentile order (before/after for each), with
    an optional country count per continent.
    """
    percentiles = sorted({r.percentile for r in rows})
    labels = list(dict.fromkeys(r.continent for r in rows))
    by_key = {(r.continent, r.stage, r.percentile): r.proportion for r in rows}
    header = ["continent"]
    if counts is not None:
        header.append("countries")
    for p in percentiles:
        header += [f"before_{p}", f"after_{p}"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for label in labels:
            row = [label]
            if counts is not None:
                row.append(str(counts.get(label, 0)))
            for p in percentiles:
                row.append(f"{by_key[(label, 'before', p)]:.6f}")
                row.append(f"{by_key[(label, 'after', p)]:.6f}")
            writer.writerow(row)
