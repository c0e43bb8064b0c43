"""End-to-end command-line runs through real files in temp directories."""

import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from leoloc import (
    NoiseSpec,
    read_pass_file,
    read_result_file,
    synthesize_capture,
    write_iq_file,
)

SCENARIO_YAML = "seed: 11\nn_passes: 2\n"


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "leoloc.cli", *map(str, args)],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "scenario.yaml").write_text(SCENARIO_YAML)
    return d


@pytest.fixture(scope="module")
def simdir(workdir):
    out = workdir / "sim"
    r = run_cli("simulate", workdir / "scenario.yaml", "-o", out)
    assert r.returncode == 0, r.stderr
    assert "wrote 3 passes" in r.stdout  # 2 scored + 1 calibration
    return out


def test_simulate_writes_pass_and_truth_files(simdir):
    for name in ("cal_pass.txt", "cal_truth.txt", "pass_0000.txt",
                 "truth_0000.txt", "pass_0001.txt", "truth_0001.txt"):
        assert (simdir / name).exists(), name


def test_localize_agrees_with_evaluate(workdir, simdir):
    result_path = workdir / "pass0.result"
    r = run_cli("localize", simdir / "pass_0000.txt", "-o", result_path,
                "--cal-pass", simdir / "cal_pass.txt",
                "--cal-truth", simdir / "cal_truth.txt")
    assert r.returncode == 0, r.stderr
    res = read_result_file(result_path)

    csv_path = workdir / "report.csv"
    r = run_cli("evaluate", workdir / "scenario.yaml",
                "-o", workdir / "report.txt", "--csv", csv_path)
    assert r.returncode == 0, r.stderr
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    row = next(x for x in rows if x["index"] == "0")

    # same seed, same stream: the standalone run must reproduce the
    # evaluation's winner and height exactly
    assert (int(row["winner_i"]), int(row["winner_j"])) == res.winner
    assert float(row["h_star_m"]) == res.h_star
    assert row["failure"] == ""


def test_frontend_builds_pass_file(workdir, oracle_truth, gs10, scenario):
    cap = synthesize_capture(oracle_truth, gs10.array, NoiseSpec(),
                             scenario.fc, doppler_offset=25e3, duration=0.6,
                             rng=np.random.default_rng(2))
    iq_path = workdir / "short.iq"
    write_iq_file(iq_path, cap)
    out_path = workdir / "short.pass"
    r = run_cli("frontend", iq_path, "-o", out_path,
                "--lat", math.degrees(scenario.lat),
                "--lon", math.degrees(scenario.lon),
                "--alt", scenario.alt,
                "--yaw", math.degrees(scenario.yaw),
                "--k", 10)
    assert r.returncode == 0, r.stderr
    obs, gs, fc = read_pass_file(out_path)
    assert fc == pytest.approx(scenario.fc)
    assert gs.array.spacing == gs10.array.spacing
    assert obs.valid.sum() > 50
    # wrapped phases and a Doppler near the injected offset band
    ok = obs.valid
    assert np.all(np.abs(obs.dphi01[ok]) <= math.pi + 1e-9)
    assert np.nanmax(np.abs(obs.doppler[ok])) < 1e6


def test_evaluate_report_text(workdir):
    r = run_cli("evaluate", workdir / "scenario.yaml", "--passes", "2")
    assert r.returncode == 0, r.stderr
    assert "correct-lobe rate" in r.stdout
    assert "3d_angle_deg" in r.stdout


def test_sweep_runs_each_k(workdir):
    (workdir / "sweep.yaml").write_text(SCENARIO_YAML + "sweep_k: [4, 6]\n")
    r = run_cli("sweep", workdir / "sweep.yaml", "--passes", "1")
    assert r.returncode == 0, r.stderr
    assert "sweep k=4" in r.stdout
    assert "sweep k=6" in r.stdout


def test_config_error_category(workdir):
    bad = workdir / "bad.yaml"
    bad.write_text("station:\n  bogus_key: 1\n")
    r = run_cli("evaluate", bad)
    assert r.returncode == 2
    assert "error [config]" in r.stderr
    assert "station.bogus_key" in r.stderr


def test_file_format_error_category(workdir):
    junk = workdir / "junk.txt"
    junk.write_text("not a pass file\n")
    r = run_cli("localize", junk, "-o", workdir / "x.result")
    assert r.returncode == 2
    assert "error [file-format]" in r.stderr


def test_io_error_category(workdir):
    r = run_cli("localize", workdir / "does_not_exist.txt",
                "-o", workdir / "x.result")
    assert r.returncode == 2
    assert "error [io]" in r.stderr


def test_cal_flags_must_come_together(workdir, simdir):
    r = run_cli("localize", simdir / "pass_0000.txt",
                "-o", workdir / "x.result",
                "--cal-pass", simdir / "cal_pass.txt")
    assert r.returncode == 2
    assert "error [config]" in r.stderr
