"""Command-line interface: scenario files, artifacts and exit codes."""

import csv

import pytest

from aeroacm.cli import (EXIT_BELOW_MINIMUM, EXIT_CONFIG, EXIT_OK,
                         EXIT_OUT_OF_RANGE, load_scenario, main)
from aeroacm.errors import ConfigError


@pytest.fixture()
def scenario(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(
        "num_dta: 16\n"
        "num_dra: 2\n"
        "num_interferers: 2\n"
        "trials: 12\n"
        "seed: 7\n"
    )
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_load_scenario_defaults_and_controls(scenario):
    config, controls = load_scenario(None)
    assert config.num_dta == 32
    assert controls["trials"] == 2000

    config, controls = load_scenario(str(scenario))
    assert config.num_dta == 16
    assert config.link_distance == 10e3  # untouched keys keep defaults
    assert controls["trials"] == 12 and controls["seed"] == 7


def test_load_scenario_rejects_unknown_keys(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("num_dta: 16\nantennas: 4\n")
    with pytest.raises(ConfigError, match="antennas"):
        load_scenario(str(bad))
    notmap = tmp_path / "list.yaml"
    notmap.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_scenario(str(notmap))


def test_analyze_report(scenario, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["analyze", "--config", str(scenario), "--out", str(out)])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "link budget:" in text
    assert "theoretical mode:" in text and "approximate mode:" in text
    assert (out / "analyze.txt").read_text().strip() == text.strip()


def test_analyze_rejects_bad_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("no_such_key: 1\n")
    assert main(["analyze", "--config", str(bad)]) == EXIT_CONFIG
    assert "no_such_key" in capsys.readouterr().err


def test_simulate_artifacts(scenario, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["simulate", "--config", str(scenario), "--out", str(out),
                 "--trials", "8"])
    assert code == EXIT_OK
    assert "simulated rate per DRA" in capsys.readouterr().out
    samples = read_rows(out / "samples.csv")
    assert samples[0] == ["trial", "rate"]
    assert len(samples) == 9  # --trials overrides the scenario file
    probs = read_rows(out / "ccdf.csv")
    assert probs[0] == ["rate", "prob"]
    assert len(probs) == 202


def test_simulate_svg_output(scenario, tmp_path):
    out = tmp_path / "out"
    code = main(["simulate", "--config", str(scenario), "--out", str(out),
                 "--trials", "8", "--format", "both"])
    assert code == EXIT_OK
    svg = (out / "ccdf.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def _design(scenario, out):
    return main(["design-acm", "--config", str(scenario), "--out", str(out)])


def test_design_acm_table(scenario, tmp_path, capsys):
    # a coarse design grid keeps this quick; the scenario file carries it
    scenario.write_text(scenario.read_text() + "grid: 10.0\n")
    out = tmp_path / "out"
    assert _design(scenario, out) == EXIT_OK
    stdout = capsys.readouterr().out
    assert stdout.startswith("mode  modulation")
    rows = read_rows(out / "acm_table.csv")
    assert rows[0] == ["mode", "modulation", "code_rate", "se_bps_hz",
                       "threshold_km", "rate_per_dra_mbps", "total_rate_mbps"]
    thresholds = [float(r[4]) for r in rows[1:]]
    assert all(a > b for a, b in zip(thresholds, thresholds[1:]))


def test_select_exit_codes(scenario, tmp_path, capsys):
    scenario.write_text(scenario.read_text() + "grid: 10.0\n")
    out = tmp_path / "out"
    assert _design(scenario, out) == EXIT_OK
    capsys.readouterr()
    table = str(out / "acm_table.csv")

    code = main(["select", "--config", str(scenario), "--table", table,
                 "--distance-km", "10"])
    assert code == EXIT_OK
    assert "mode" in capsys.readouterr().out

    code = main(["select", "--config", str(scenario), "--table", table,
                 "--distance-km", "2000"])
    assert code == EXIT_OUT_OF_RANGE

    code = main(["select", "--config", str(scenario), "--table", table,
                 "--distance-km", "1"])
    assert code == EXIT_BELOW_MINIMUM


def test_sweep_artifacts_and_km_conversion(scenario, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["sweep", "--config", str(scenario), "--out", str(out),
                 "--axis", "d_ab", "--values", "10,70", "--trials", "6"])
    assert code == EXIT_OK
    assert "d_ab=10000" in capsys.readouterr().out
    rows = read_rows(out / "sweep.csv")
    assert rows[0][0] == "axis_value"
    assert [float(r[0]) for r in rows[1:]] == [10e3, 70e3]
    # per-point artifacts are tagged in km for the distance axis
    assert (out / "samples_d_ab_10.csv").exists()
    assert (out / "ccdf_d_ab_70.csv").exists()


def test_sweep_rejects_unknown_axis(scenario, capsys):
    code = main(["sweep", "--config", str(scenario), "--axis", "frequency",
                 "--values", "1,2", "--trials", "4"])
    assert code == EXIT_CONFIG
    assert "frequency" in capsys.readouterr().err
