"""End-to-end command-line tests against synthetic fixtures."""

import json

import numpy as np
import pytest

from wasserscan.cli import (
    EXIT_DEGENERATE,
    EXIT_INGEST,
    EXIT_OK,
    EXIT_PARAMS,
    main,
)

from conftest import make_case_files, write_continent_csv


def run(*args):
    return main([str(a) for a in args])


def read_manifest(out, command):
    with open(out / f"{command}_manifest.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture
def ingested(tmp_path, case_files):
    confirmed, deaths, continents = case_files
    out = tmp_path / "run"
    code = run("ingest", "--confirmed", confirmed, "--deaths", deaths,
               "--continents", continents, "--out", out)
    assert code == EXIT_OK
    return out


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def test_ingest_writes_panel_and_log(ingested):
    assert (ingested / "panel.csv").exists()
    assert (ingested / "panel_deaths.csv").exists()
    assert (ingested / "panel_confirmed.csv").exists()
    log = (ingested / "ingest_log.csv").read_text()
    assert "included" in log
    manifest = read_manifest(ingested, "ingest")
    assert manifest["results"]["days"] == 150
    assert manifest["results"]["countries"] == 10


def test_ingest_empty_continent_map_is_fatal(tmp_path, case_files):
    confirmed, deaths, _ = case_files
    empty_map = tmp_path / "empty.csv"
    write_continent_csv(empty_map, [])
    code = run("ingest", "--confirmed", confirmed, "--deaths", deaths,
               "--continents", empty_map, "--out", tmp_path / "o")
    assert code == EXIT_INGEST


def test_ingest_missing_file_is_fatal(tmp_path, case_files):
    confirmed, deaths, continents = case_files
    code = run("ingest", "--confirmed", tmp_path / "nope.csv", "--deaths", deaths,
               "--continents", continents, "--out", tmp_path / "o")
    assert code == EXIT_INGEST


def test_relaxed_min_days_never_reduces_rows(tmp_path, case_files):
    confirmed, deaths, continents = case_files
    strict_out = tmp_path / "strict"
    relaxed_out = tmp_path / "relaxed"
    assert run("ingest", "--confirmed", confirmed, "--deaths", deaths,
               "--continents", continents, "--out", strict_out) == EXIT_OK
    assert run("ingest", "--confirmed", confirmed, "--deaths", deaths,
               "--continents", continents, "--min-days", 100,
               "--out", relaxed_out) == EXIT_OK
    strict_rows = read_manifest(strict_out, "ingest")["results"]["countries"]
    relaxed_rows = read_manifest(relaxed_out, "ingest")["results"]["countries"]
    assert relaxed_rows >= strict_rows


# ---------------------------------------------------------------------------
# densities
# ---------------------------------------------------------------------------

def test_densities_normalized_per_day(ingested):
    assert run("densities", "--out", ingested, "--grid", 201, "--levels", 200) == EXIT_OK
    raw = np.loadtxt(ingested / "densities.csv", delimiter=",", skiprows=1)
    with open(ingested / "densities.csv", encoding="utf-8") as fh:
        grid = np.array([float(x) for x in fh.readline().split(",")[1:]])
    assert raw.shape[0] == 150
    for row in raw[:: 30]:
        assert np.trapezoid(row[1:], grid) == pytest.approx(1.0, abs=1e-6)
    quant = np.loadtxt(ingested / "quantiles.csv", delimiter=",", skiprows=1)
    assert quant.shape == (150, 201)


def test_densities_single_day_panel(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    with open(out / "panel.csv", "w", encoding="utf-8") as fh:
        fh.write("country,continent,day_1\n")
        for i in range(12):
            fh.write(f"c{i},Europe,{0.01 + 0.01 * i}\n")
    assert run("densities", "--out", out, "--grid", 101, "--levels", 100) == EXIT_OK
    raw = np.loadtxt(out / "densities.csv", delimiter=",", skiprows=1)
    assert raw.ndim == 1  # single row


def test_densities_requires_panel(tmp_path):
    out = tmp_path / "empty"
    out.mkdir()
    assert run("densities", "--out", out) == EXIT_INGEST


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------

def test_detect_recovers_planted_change(tmp_path):
    out = tmp_path / "sim"
    assert run("simulate", "--family-a", "beta:2,8", "--family-b", "beta:2,5",
               "--change-index", 104, "--days", 150, "--draws", 189,
               "--seed", 5, "--out", out) == EXIT_OK
    assert run("densities", "--out", out, "--grid", 201, "--levels", 200) == EXIT_OK
    assert run("detect", "--out", out, "--permutations", 60, "--seed", 2) == EXIT_OK
    manifest = read_manifest(out, "detect")
    assert abs(manifest["results"]["tau_hat"] - 104) <= 3
    assert manifest["results"]["p_value"] <= 0.05
    curve = np.loadtxt(out / "statistic_curve.csv", delimiter=",", skiprows=1)
    assert curve.shape[1] == 3
    assert np.all(curve[:, 2] >= 0)
    means = np.loadtxt(out / "frechet_means.csv", delimiter=",", skiprows=1)
    assert means.shape[1] == 3


def test_detect_degenerate_panel_exits_distinctly(tmp_path):
    out = tmp_path / "flat"
    out.mkdir()
    with open(out / "panel.csv", "w", encoding="utf-8") as fh:
        fh.write("country,continent," + ",".join(f"day_{j+1}" for j in range(40)) + "\n")
        for i in range(8):
            fh.write(f"c{i},Europe," + ",".join(["0.2"] * 40) + "\n")
    with pytest.warns(UserWarning):
        assert run("densities", "--out", out, "--grid", 101, "--levels", 100) == EXIT_OK
    code = run("detect", "--out", out, "--permutations", 20, "--seed", 0)
    assert code == EXIT_DEGENERATE
    manifest = read_manifest(out, "detect")
    assert manifest["results"]["degenerate"] is True
    assert manifest["results"]["p_value"] == 1.0


def test_detect_rejects_bad_cut(ingested):
    assert run("densities", "--out", ingested, "--grid", 101, "--levels", 100) == EXIT_OK
    assert run("detect", "--out", ingested, "--cut", "0.6") == EXIT_PARAMS


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def test_report_defaults_to_detected_split(ingested):
    assert run("densities", "--out", ingested, "--grid", 101, "--levels", 100) == EXIT_OK
    assert run("detect", "--out", ingested, "--permutations", 20, "--seed", 0) in (
        EXIT_OK, EXIT_DEGENERATE,
    )
    assert run("report", "--out", ingested) == EXIT_OK
    manifest = read_manifest(ingested, "report")
    detect_manifest = read_manifest(ingested, "detect")
    assert manifest["results"]["split_day"] == detect_manifest["results"]["tau_hat"]
    assert (ingested / "quantile_table.csv").exists()
    assert (ingested / "continent_series.csv").exists()
    assert any((ingested / "country_series").iterdir())


def test_report_split_at_window_is_parameter_error(ingested):
    assert run("report", "--out", ingested, "--split-day", 150) == EXIT_PARAMS


def test_report_without_split_or_detect_fails(tmp_path, case_files):
    confirmed, deaths, continents = case_files
    out = tmp_path / "r"
    assert run("ingest", "--confirmed", confirmed, "--deaths", deaths,
               "--continents", continents, "--out", out) == EXIT_OK
    assert run("report", "--out", out) == EXIT_PARAMS


def test_report_quantile_table_shares_sum_to_one(ingested):
    # With only 10 countries the strict 5th/95th tails are empty by the
    # order-statistic convention, so check the 90th percentile columns,
    # whose tail holds exactly one country each day.
    assert run("report", "--out", ingested, "--split-day", 75) == EXIT_OK
    with open(ingested / "quantile_table.csv", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    checked = 0
    for j, name in enumerate(header):
        if name.endswith("_90"):
            total = sum(float(r[j]) for r in rows)
            assert total == pytest.approx(1.0, abs=1e-5)
            checked += 1
    assert checked == 2


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_dimensions_and_truth(tmp_path):
    out = tmp_path / "sim"
    assert run("simulate", "--family-a", "beta:2,8", "--family-b", "beta:2,5",
               "--change-index", 104, "--days", 150, "--draws", 189,
               "--out", out) == EXIT_OK
    with open(out / "ground_truth.json", encoding="utf-8") as fh:
        truth = json.load(fh)
    assert truth["change_index"] == 104
    assert truth["is_null"] is False
    raw = np.loadtxt(out / "panel.csv", delimiter=",", skiprows=1,
                     usecols=range(2, 152))
    assert raw.shape == (189, 150)


def test_simulate_null_panel(tmp_path):
    out = tmp_path / "null"
    assert run("simulate", "--family-a", "beta:2,5", "--change-index", 75,
               "--days", 60, "--draws", 30, "--out", out) == EXIT_PARAMS
    assert run("simulate", "--family-a", "beta:2,5", "--change-index", 30,
               "--days", 60, "--draws", 30, "--out", out) == EXIT_OK
    with open(out / "ground_truth.json", encoding="utf-8") as fh:
        assert json.load(fh)["is_null"] is True


def test_simulate_rejects_edge_change_index(tmp_path):
    out = tmp_path / "bad"
    assert run("simulate", "--change-index", 1, "--days", 150, "--draws", 20,
               "--out", out) == EXIT_PARAMS
    assert run("simulate", "--change-index", 150, "--days", 150, "--draws", 20,
               "--out", out) == EXIT_PARAMS


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

def _strip_timings(manifest):
    manifest = dict(manifest)
    manifest.pop("timings", None)
    return manifest


def test_rerun_reproduces_outputs_bit_identically(tmp_path, case_files):
    confirmed, deaths, continents = case_files
    out = tmp_path / "run"
    data_files = ["panel.csv", "densities.csv", "quantiles.csv",
                  "statistic_curve.csv", "frechet_means.csv"]

    snapshots = []
    for _ in range(2):
        assert run("ingest", "--confirmed", confirmed, "--deaths", deaths,
                   "--continents", continents, "--out", out) == EXIT_OK
        assert run("densities", "--out", out, "--grid", 151,
                   "--levels", 150) == EXIT_OK
        assert run("detect", "--out", out, "--permutations", 30,
                   "--seed", 11) in (EXIT_OK, EXIT_DEGENERATE)
        snapshots.append({
            name: (out / name).read_bytes() for name in data_files if (out / name).exists()
        })
        snapshots[-1]["detect_manifest"] = json.dumps(
            _strip_timings(read_manifest(out, "detect")), sort_keys=True
        )
    assert snapshots[0] == snapshots[1]
