"""Shared fixtures: tiny wide-format case files in the ingestion layout."""

import csv
import datetime as dt

import numpy as np
import pytest

START = dt.date(2020, 1, 22)

COUNTRIES = [
    ("Alphaland", "Europe"),
    ("Betania", "Europe"),
    ("Gammastan", "Asia"),
    ("Deltaria", "Asia"),
    ("Epsilonia", "Africa"),
    ("Zetaland", "Africa"),
    ("Etaville", "North America"),
    ("Thetopia", "South America"),
    ("Iotia", "Oceania"),
    ("Kappaland", "Europe"),
]


def date_columns(n_days, start=START):
    dates = [start + dt.timedelta(days=i) for i in range(n_days)]
    return dates, [f"{d.month}/{d.day}/{d.year % 100}" for d in dates]


def write_wide_csv(path, rows, n_days, start=START):
    """rows: list of (province, country, counts array)."""
    _, cols = date_columns(n_days, start)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Province/State", "Country/Region", "Lat", "Long"] + cols)
        for province, country, counts in rows:
            writer.writerow([province, country, "0", "0"] + [str(int(v)) for v in counts])


def write_continent_csv(path, pairs):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["country", "continent"])
        writer.writerows(pairs)


def make_case_files(tmp_path, n_days=210, seed=42, countries=COUNTRIES):
    """Synthetic confirmed/deaths/continent files covering a full window."""
    rng = np.random.default_rng(seed)
    conf_rows, death_rows = [], []
    for i, (name, continent) in enumerate(countries):
        daily = rng.poisson(40 + 12 * i, n_days)
        confirmed = np.cumsum(daily)
        frac = 0.02 + 0.02 * rng.random() + (0.02 if continent == "Europe" else 0.0)
        deaths = (confirmed * frac).astype(int)
        if name == "Alphaland":
            half_c, half_d = confirmed // 2, deaths // 2
            conf_rows.append(("ProvA", name, half_c))
            conf_rows.append(("ProvB", name, confirmed - half_c))
            death_rows.append(("ProvA", name, half_d))
            death_rows.append(("ProvB", name, deaths - half_d))
        else:
            conf_rows.append(("", name, confirmed))
            death_rows.append(("", name, deaths))
    confirmed_path = tmp_path / "confirmed.csv"
    deaths_path = tmp_path / "deaths.csv"
    continents_path = tmp_path / "continents.csv"
    write_wide_csv(confirmed_path, conf_rows, n_days)
    write_wide_csv(deaths_path, death_rows, n_days)
    write_continent_csv(continents_path, countries)
    return confirmed_path, deaths_path, continents_path


@pytest.fixture
def case_files(tmp_path):
    return make_case_files(tmp_path)
