from __future__ import annotations

import csv
import hashlib
import sys

import numpy as np
import pytest

from cespdc import cli

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SMALL_CONFIG = """\
preset = "paper-2020"
seed = 20200814

[correlation]
duration_s = 0.5

[scan]
jsi_span_hz = 2.0e9
jsi_points = 401
dfg_span_hz = 160.0e9
dfg_points = 4001
filter_scan_range_hz = 30.0e9
filter_scan_step_hz = 100.0e6
enumeration_window_hz = 150.0e9
spectroscopy_span_hz = 4.0e9
spectroscopy_step_hz = 200.0e6
"""


@pytest.fixture(scope="module")
def cfg(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "small.toml"
    path.write_text(SMALL_CONFIG)
    return str(path)


def run(argv):
    return cli.main(argv)


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def check_manifest(out_dir):
    with open(out_dir / "manifest.toml", "rb") as fh:
        man = tomllib.load(fh)
    for name, digest in man["outputs"].items():
        assert hashlib.sha256((out_dir / name).read_bytes()).hexdigest() == digest
    assert man["inputs"]["seed"] == 20200814
    assert len(man["inputs"]["config_sha256"]) == 64
    return man


def test_jsi_command(cfg, tmp_path, capsys):
    out = tmp_path / "jsi"
    assert run(["jsi", "--config", cfg, "--out", str(out)]) == 0
    assert "cespdc jsi:" in capsys.readouterr().out
    header, rows = read_csv(out / "jsi.csv")
    assert header == ["detuning_hz", "weight"]
    assert len(rows) == 401
    man = check_manifest(out)
    assert man["command"] == "jsi"


def test_jsi_csv_round_trips_losslessly(cfg, tmp_path):
    from cespdc.config import load_bundle
    from cespdc.spectrum import jsi_slice
    out = tmp_path / "jsi"
    run(["jsi", "--config", cfg, "--out", str(out)])
    _, rows = read_csv(out / "jsi.csv")
    det = np.array([float(r[0]) for r in rows])
    stored = np.array([float(r[1]) for r in rows])
    bundle = load_bundle(cfg)
    recomputed = jsi_slice(bundle.source, bundle.source.signal_anchor_hz + det)
    np.testing.assert_array_equal(stored, recomputed)  # exact, not approximate


def test_clusters_command(cfg, tmp_path):
    out = tmp_path / "clusters"
    assert run(["clusters", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out / "modes.csv")
    assert header[:2] == ["signal_index", "idler_index"]
    assert len(rows) > 100
    with open(out / "clusters.toml", "rb") as fh:
        rep = tomllib.load(fh)
    assert rep["predicted_spacing_hz"] == pytest.approx(70.29e9, rel=1e-3)
    assert rep["empirical_fwhm_count"] == 3


def test_dfg_scan_command(cfg, tmp_path):
    out = tmp_path / "dfg"
    assert run(["dfg-scan", "--config", cfg, "--out", str(out)]) == 0
    _, rows = read_csv(out / "dfg_scan.csv")
    assert len(rows) == 4001


def test_filter_design_command(cfg, tmp_path):
    out = tmp_path / "fd"
    assert run(["filter-design", "--config", cfg, "--out", str(out),
                "--purity-target", "0.05"]) == 0
    with open(out / "design.toml", "rb") as fh:
        design = tomllib.load(fh)
    assert design["unwanted_fraction"] <= 0.05


def test_filter_scan_command(cfg, tmp_path):
    out = tmp_path / "fs"
    assert run(["filter-scan", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_csv(out / "filter_scan.csv")
    assert header == ["detuning_hz", "singles"]


def test_g2_command_fit_output(cfg, tmp_path):
    out = tmp_path / "g2"
    assert run(["g2", "--config", cfg, "--out", str(out)]) == 0
    with open(out / "fit.toml", "rb") as fh:
        fit = tomllib.load(fh)
    assert fit["gamma_s_mhz"] == pytest.approx(6.9, rel=0.1)
    header, _ = read_csv(out / "histogram.csv")
    assert header == ["tau_ps", "count"]


def test_g2_multimode_command(cfg, tmp_path):
    out = tmp_path / "g2mm"
    assert run(["g2", "--config", cfg, "--out", str(out), "--multimode"]) == 0
    assert (out / "g2_model.csv").exists()
    assert not (out / "fit.toml").exists()


def test_events_then_fit_round_trip(cfg, tmp_path):
    ev = tmp_path / "ev"
    assert run(["events", "--config", cfg, "--out", str(ev)]) == 0
    header, rows = read_csv(ev / "events.csv")
    assert header == ["channel", "timestamp_ps"]
    assert {r[0] for r in rows} == {"s", "i"}
    fit_dir = tmp_path / "fit"
    assert run(["fit", "--config", cfg, "--out", str(fit_dir),
                "--events", str(ev / "events.csv")]) == 0
    with open(fit_dir / "fit.toml", "rb") as fh:
        fit = tomllib.load(fh)
    assert fit["gamma_i_mhz"] == pytest.approx(6.3, rel=0.1)


def test_events_reproducible_and_seed_sensitive(cfg, tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    run(["events", "--config", cfg, "--out", str(a)])
    run(["events", "--config", cfg, "--out", str(b)])
    run(["events", "--config", cfg, "--out", str(c), "--seed", "999"])
    assert (a / "events.csv").read_bytes() == (b / "events.csv").read_bytes()
    assert (a / "manifest.toml").read_bytes() == (b / "manifest.toml").read_bytes()
    assert (a / "events.csv").read_bytes() != (c / "events.csv").read_bytes()


def test_plan_command(cfg, tmp_path):
    out = tmp_path / "plan"
    assert run(["plan", "--config", cfg, "--out", str(out),
                "--delta-nu-mhz", "250"]) == 0
    with open(out / "plan.toml", "rb") as fh:
        plan = tomllib.load(fh)
    assert plan["violations"] == []
    assert plan["nu_pump_hz"] == plan["nu_signal_hz"] + plan["nu_idler_hz"]
    assert plan["tuning_temperature_offset_k"] == pytest.approx(1.948, abs=0.01)


def test_spectroscopy_command(cfg, tmp_path):
    out = tmp_path / "sweep"
    assert run(["spectroscopy", "--config", cfg, "--out", str(out)]) == 0
    _, rows = read_csv(out / "spectroscopy.csv")
    arms = {r[0] for r in rows}
    assert arms == {"signal", "idler"}


def test_exit_code_config_error(tmp_path):
    assert run(["jsi", "--preset", "no-such-preset",
                "--out", str(tmp_path / "x")]) == 3


def test_exit_code_infeasible(cfg, tmp_path):
    assert run(["plan", "--config", cfg, "--out", str(tmp_path / "x"),
                "--delta-nu-mhz", "2000"]) == 4


def test_exit_code_runtime_failure(cfg, tmp_path):
    assert run(["fit", "--config", cfg, "--out", str(tmp_path / "x"),
                "--events", str(tmp_path / "missing.csv")]) == 5


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        cli.build_parser().parse_args(["not-a-command"])
    assert err.value.code == 2
