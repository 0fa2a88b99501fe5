"""Batch driver: simulate, stationarity, pqr, pvm, granger."""

import json
import os

import pytest

from panelmix.cli import main
from panelmix.panel import CsvSchema, load_panel_csv, to_quarterly


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One end-to-end run at the packaged demo settings, shared read-only."""
    root = tmp_path_factory.mktemp("cli")
    out = str(root / "run")
    assert main(["simulate", "--kind", "midas_var", "--seed", "42", "--out", out]) == 0
    cfg_path = os.path.join(out, "config.json")
    for cmd in (
        ["stationarity", "--config", cfg_path, "--out", out],
        ["pqr", "--config", cfg_path, "--out", out],
        ["pvm", "--config", cfg_path, "--out", out, "--horizons", "12"],
        ["granger", "--config", cfg_path, "--out", out],
    ):
        assert main(cmd) == 0, f"command failed: {cmd[0]}"
    return out


# -- simulate ------------------------------------------------------------------

def test_simulate_writes_loader_valid_pair(tmp_path, capsys):
    out = str(tmp_path / "sim")
    assert main(["simulate", "--kind", "midas_var", "--seed", "7", "--out", out]) == 0
    assert "wrote" in capsys.readouterr().out
    monthly = load_panel_csv(os.path.join(out, "monthly.csv"), CsvSchema(), "monthly")
    quarterly = load_panel_csv(
        os.path.join(out, "quarterly.csv"), CsvSchema(), "quarterly"
    )
    assert monthly.n_periods == 3 * quarterly.n_periods
    to_quarterly(monthly)  # aggregates only when every quarter is whole
    with open(os.path.join(out, "config.json")) as fh:
        cfg = json.load(fh)
    assert cfg["seed"] == 7
    assert cfg["response"] == "q"


def test_simulate_same_flags_byte_identical(tmp_path):
    dirs = [str(tmp_path / "a"), str(tmp_path / "b")]
    for out in dirs:
        assert main(
            ["simulate", "--kind", "midas_var", "--seed", "9", "--out", out]
        ) == 0
    for name in ("monthly.csv", "quarterly.csv", "config.json", "manifest.json"):
        blobs = []
        for out in dirs:
            with open(os.path.join(out, name), "rb") as fh:
                blobs.append(fh.read())
        assert blobs[0] == blobs[1], name


def test_simulate_requires_seed(tmp_path, capsys):
    out = str(tmp_path / "noseed")
    assert main(["simulate", "--kind", "midas_var", "--out", out]) == 2
    assert "seed" in capsys.readouterr().err


def test_simulate_invalid_kind_lists_choices(tmp_path, capsys):
    code = main(
        ["simulate", "--kind", "fractal", "--seed", "1", "--out", str(tmp_path)]
    )
    assert code == 2
    err = capsys.readouterr().err
    assert "midas_var" in err and "random_walk_panel" in err


def test_simulate_plain_panel_kind(tmp_path):
    out = str(tmp_path / "rw")
    assert main(
        [
            "simulate",
            "--kind",
            "random_walk_panel",
            "--seed",
            "3",
            "--n-entities",
            "4",
            "--n-periods",
            "30",
            "--out",
            out,
        ]
    ) == 0
    panel = load_panel_csv(os.path.join(out, "panel.csv"), CsvSchema(), "quarterly")
    assert panel.n_entities == 4
    assert panel.n_periods == 30


# -- error surfaces ---------------------------------------------------------------

def test_missing_input_file_exit_two_names_path(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(
        json.dumps(
            {
                "seed": 1,
                "quarterly_csv": "absent.csv",
                "monthly_csv": "also_absent.csv",
                "response": "q",
                "financial": ["cr"],
                "uncertainty": ["epu"],
            }
        )
    )
    code = main(["stationarity", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "input file not found" in err
    assert "absent.csv" in err


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"seed": 1, "quartlery_csv": "x.csv"}))
    code = main(["stationarity", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "quartlery_csv" in capsys.readouterr().err


def test_missing_config_flag_exit_two(capsys):
    assert main(["granger"]) == 2
    assert "--config" in capsys.readouterr().err


def test_computation_error_exits_one(pipeline, tmp_path, capsys):
    cfg_path = os.path.join(pipeline, "config.json")
    out = str(tmp_path / "deep")
    code = main(["granger", "--config", cfg_path, "--out", out, "--lags", "120"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


# -- stationarity -----------------------------------------------------------------

def test_stationarity_report_shape(pipeline):
    with open(os.path.join(pipeline, "stationarity.json")) as fh:
        report = json.load(fh)
    llc = {r["variable"]: r for r in report["llc"]}
    assert set(llc) == {"q", "cr", "da", "oiad", "qr"}
    assert all(r["test"] == "llc" for r in llc.values())
    adf = {r["variable"]: r for r in report["adf"]}
    pp = {r["variable"]: r for r in report["pp"]}
    assert set(adf) == set(pp) == {"epu", "rec_risk", "infexp", "consconf"}
    for row in list(llc.values()) + list(adf.values()) + list(pp.values()):
        assert set(row["critical_values"]) == {"1%", "5%", "10%"}
        assert row["marker"] in ("a", "b", "")
    text = open(os.path.join(pipeline, "stationarity.txt")).read()
    assert "difference before modeling:" in text


def test_stationarity_flags_the_built_in_random_walks(pipeline):
    with open(os.path.join(pipeline, "stationarity.json")) as fh:
        report = json.load(fh)
    assert "q" in report["difference"]


def test_manifest_keyed_by_command(pipeline):
    with open(os.path.join(pipeline, "manifest.json")) as fh:
        manifest = json.load(fh)
    for cmd in ("simulate", "stationarity", "pqr", "pvm", "granger"):
        entry = manifest[cmd]
        assert set(entry) == {
            "config_hash",
            "seed",
            "package_version",
            "quantile_backend",
        }
        assert entry["seed"] == 42
        assert len(entry["config_hash"]) == 64


# -- pqr --------------------------------------------------------------------------

def test_pqr_table_has_sixteen_rows_and_three_quantiles(pipeline):
    lines = open(os.path.join(pipeline, "pqr.csv")).read().strip().splitlines()
    assert len(lines) == 17  # header + 4 financial + 4 uncertainty x 3 lags
    header = lines[0].split(",")
    assert header[0] == "regressor"
    assert "q25_coefficient" in header and "q75_dispersion" in header
    with open(os.path.join(pipeline, "pqr.json")) as fh:
        report = json.load(fh)
    assert report["taus"] == [0.25, 0.5, 0.75]
    assert report["mcmc"]["enabled"] is True
    rates = report["mcmc"]["mean_acceptance_rates"]
    assert set(rates) == {"0.25", "0.5", "0.75"}
    assert all(0.0 < r < 1.0 for r in rates.values())


def test_pqr_tau_override_changes_columns(pipeline, tmp_path):
    out = str(tmp_path / "taus")
    cfg_path = os.path.join(pipeline, "config.json")
    assert main(
        ["pqr", "--config", cfg_path, "--out", out, "--taus", "0.1,0.9"]
    ) == 0
    with open(os.path.join(out, "pqr.json")) as fh:
        report = json.load(fh)
    assert report["taus"] == [0.1, 0.9]
    header = open(os.path.join(out, "pqr.csv")).readline().strip().split(",")
    assert "q10_coefficient" in header and "q90_coefficient" in header
    assert "q25_coefficient" not in header


def test_pqr_reports_heterogeneity_notes(pipeline):
    with open(os.path.join(pipeline, "pqr.json")) as fh:
        report = json.load(fh)
    notes = report["heterogeneity"]
    assert isinstance(notes, list)
    assert any("slope moves across quantile levels" in n for n in notes)


# -- pvm --------------------------------------------------------------------------

def test_pvm_lag_selection_table_written(pipeline):
    with open(os.path.join(pipeline, "lag_selection.json")) as fh:
        sel = json.load(fh)
    assert sel["p_max"] == 4
    assert set(sel["criteria"]) == {"1", "2", "3", "4"}
    assert set(sel["criteria"]["1"]) == {"aic", "bic", "hqic", "fpe"}
    assert set(sel["chosen"]) == {"aic", "bic", "hqic", "fpe"}
    assert sel["used"] == sel["auto"] >= 1


def test_pvm_per_pair_files_cover_the_grid(pipeline):
    with open(os.path.join(pipeline, "posterior_summary.json")) as fh:
        summary = json.load(fh)
    k = len(summary["columns"])
    assert k == 4  # epu[m1..m3] plus q
    irf_dir = os.path.join(pipeline, "irf")
    files = sorted(os.listdir(irf_dir))
    assert len(files) == k * k
    for name in files:
        lines = open(os.path.join(irf_dir, name)).read().strip().splitlines()
        assert lines[0] == "horizon,median,lower_5,upper_95"
        assert len(lines) == 14  # header + horizons 0..12
        assert lines[1].startswith("0,")


def test_pvm_ordering_override_echoed(pipeline, tmp_path):
    out = str(tmp_path / "ordered")
    cfg_path = os.path.join(pipeline, "config.json")
    assert main(
        [
            "pvm",
            "--config",
            cfg_path,
            "--out",
            out,
            "--ordering",
            "q,epu",
            "--horizons",
            "4",
        ]
    ) == 0
    with open(os.path.join(out, "posterior_summary.json")) as fh:
        summary = json.load(fh)
    assert summary["ordering"] == ["q", "epu[m1]", "epu[m2]", "epu[m3]"]
    assert summary["horizons"] == 4
    lines = open(os.path.join(out, "irf.csv")).read().strip().splitlines()
    assert lines[0] == "shock,response,horizon,median,lo,hi"
    assert len(lines) == 1 + 4 * 4 * 5


def test_pvm_posterior_summary_shape(pipeline):
    with open(os.path.join(pipeline, "posterior_summary.json")) as fh:
        summary = json.load(fh)
    assert summary["lag_order"] >= 1
    assert summary["n_rows"] > 0
    rec = summary["coefficients"][0]
    assert set(rec) == {"coefficient", "mean", "sd", "q5", "q95"}
    assert 0.0 <= summary["explosive_share"] <= 1.0


# -- granger ------------------------------------------------------------------------

def test_granger_four_rows_in_order(pipeline):
    with open(os.path.join(pipeline, "granger.json")) as fh:
        report = json.load(fh)
    assert report["effect"] == "q"
    assert report["lags"] == 3
    nulls = [r["null"] for r in report["rows"]]
    assert nulls == [
        f"{c} does not Granger cause q"
        for c in ("epu", "rec_risk", "infexp", "consconf")
    ]
    lines = open(os.path.join(pipeline, "granger.csv")).read().strip().splitlines()
    assert lines[0] == "null_hypothesis,chi_square,df,p_value,marker"
    assert len(lines) == 5
    assert lines[1].startswith("epu does not Granger cause q,")


def test_granger_coupled_demo_rejects_on_the_linked_series(pipeline):
    with open(os.path.join(pipeline, "granger.json")) as fh:
        report = json.load(fh)
    rows = {r["null"].split(" does not")[0]: r for r in report["rows"]}
    assert rows["epu"]["marker"] == "a"


# -- determinism ----------------------------------------------------------------------

def test_single_command_rerun_byte_identical(pipeline, tmp_path):
    cfg_path = os.path.join(pipeline, "config.json")
    dirs = [str(tmp_path / "da"), str(tmp_path / "db")]
    for out in dirs:
        assert main(["stationarity", "--config", cfg_path, "--out", out]) == 0
    for name in ("stationarity.json", "stationarity.txt", "manifest.json"):
        blobs = []
        for out in dirs:
            with open(os.path.join(out, name), "rb") as fh:
                blobs.append(fh.read())
        assert blobs[0] == blobs[1], name


def test_seed_override_reflected_in_manifest(pipeline, tmp_path):
    cfg_path = os.path.join(pipeline, "config.json")
    out = str(tmp_path / "seeded")
    assert main(
        ["stationarity", "--config", cfg_path, "--out", out, "--seed", "99"]
    ) == 0
    with open(os.path.join(out, "manifest.json")) as fh:
        manifest = json.load(fh)
    assert manifest["stationarity"]["seed"] == 99
