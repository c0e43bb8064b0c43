"""File formats: pass, truth, result, IQ, and scenario configs."""

import math

import numpy as np
import pytest

from leoloc import (
    ConfigError,
    FileFormatError,
    HeightGrid,
    IqCapture,
    PassObservables,
    Scenario,
    load_scenario,
    localize,
    orbit_above_station,
    parse_scenario,
    read_iq_file,
    read_pass_file,
    read_result_file,
    read_truth_file,
    synthesize_observables,
    write_iq_file,
    write_pass_file,
    write_result_file,
    write_truth_file,
)


@pytest.fixture(scope="module")
def gappy_obs(oracle_truth, gs10):
    obs = synthesize_observables(oracle_truth, gs10)
    for name in ("dphi01", "dphi12", "doppler", "snr"):
        getattr(obs, name)[100:140] = np.nan
    obs.valid[100:140] = False
    return obs


@pytest.fixture(scope="module")
def result(oracle_truth, gs10):
    obs = synthesize_observables(oracle_truth, gs10)
    return localize(obs, gs10)


# --- data files round-trip bit-exact (repr floats survive the text form) ---

def test_pass_file_round_trip(tmp_path, gappy_obs, gs10):
    p1 = tmp_path / "a.pass"
    p2 = tmp_path / "b.pass"
    write_pass_file(p1, gappy_obs, gs10)
    obs, gs, fc = read_pass_file(p1)
    for name in ("times", "dphi01", "dphi12", "doppler", "snr"):
        np.testing.assert_array_equal(getattr(obs, name),
                                      getattr(gappy_obs, name))
    np.testing.assert_array_equal(obs.valid, gappy_obs.valid)
    assert gs.position == gs10.position
    assert gs.array == gs10.array
    assert fc == 299792458.0 / gs10.array.wavelength
    write_pass_file(p2, obs, gs)
    assert p1.read_bytes() == p2.read_bytes()


def test_truth_file_round_trip(tmp_path, oracle_truth, scenario):
    spec = orbit_above_station(scenario.station(), 550e3, math.radians(53.0),
                               math.radians(84.0))
    p1 = tmp_path / "a.truth"
    p2 = tmp_path / "b.truth"
    write_truth_file(p1, oracle_truth, spec)
    truth, spec2 = read_truth_file(p1)
    for name in ("times", "azimuth", "elevation", "slant_range", "range_rate",
                 "sat_eci", "sat_ecef"):
        np.testing.assert_array_equal(getattr(truth, name),
                                      getattr(oracle_truth, name))
    assert spec2 == spec
    write_truth_file(p2, truth, spec2)
    assert p1.read_bytes() == p2.read_bytes()


def test_result_file_round_trip(tmp_path, result):
    p1 = tmp_path / "a.result"
    p2 = tmp_path / "b.result"
    write_result_file(p1, result)
    res = read_result_file(p1)
    assert res.winner == result.winner
    assert res.h_star == result.h_star
    assert res.residual == result.residual
    for name in ("times", "azimuth", "elevation", "r_track"):
        np.testing.assert_array_equal(getattr(res, name),
                                      getattr(result, name))
    np.testing.assert_array_equal(res.valid, result.valid)
    np.testing.assert_array_equal(res.trajectory, result.trajectory)
    assert [(s.ambiguity, s.loss, s.passed_elevation, s.passed_timing)
            for s in res.diagnostics.scores] == \
           [(s.ambiguity, s.loss, s.passed_elevation, s.passed_timing)
            for s in result.diagnostics.scores]
    write_result_file(p2, res)
    assert p1.read_bytes() == p2.read_bytes()


def test_iq_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    ch = (rng.normal(size=(3, 512)) + 1j * rng.normal(size=(3, 512))
          ).astype(np.complex64)
    cap = IqCapture(sample_rate=2e6, fc=11.325e9, t0=-0.25, channels=ch)
    p1 = tmp_path / "a.iq"
    p2 = tmp_path / "b.iq"
    write_iq_file(p1, cap)
    back = read_iq_file(p1)
    assert back.sample_rate == cap.sample_rate
    assert back.fc == cap.fc
    assert back.t0 == cap.t0
    assert back.channels.dtype == np.complex64
    np.testing.assert_array_equal(back.channels, cap.channels)
    write_iq_file(p2, back)
    assert p1.read_bytes() == p2.read_bytes()


# --- malformed files ---

def test_wrong_magic_rejected(tmp_path, gappy_obs, gs10):
    p = tmp_path / "x.pass"
    write_pass_file(p, gappy_obs, gs10)
    with pytest.raises(FileFormatError, match="truth"):
        read_truth_file(p)
    body = p.read_text().splitlines()
    body[0] = "leoloc pass v999"
    p.write_text("\n".join(body) + "\n")
    with pytest.raises(FileFormatError, match="header"):
        read_pass_file(p)


def test_unterminated_header_rejected(tmp_path):
    p = tmp_path / "x.pass"
    p.write_text("leoloc pass v1\nlat 0.5\n")
    with pytest.raises(FileFormatError, match="end_header"):
        read_pass_file(p)


def test_bad_float_rejected(tmp_path, gappy_obs, gs10):
    p = tmp_path / "x.pass"
    write_pass_file(p, gappy_obs, gs10)
    lines = p.read_text().splitlines()
    parts = lines[-1].split()
    parts[3] = "bogus"
    lines[-1] = " ".join(parts)
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(FileFormatError, match="non-numeric"):
        read_pass_file(p)


def test_short_row_rejected(tmp_path, gappy_obs, gs10):
    p = tmp_path / "x.pass"
    write_pass_file(p, gappy_obs, gs10)
    lines = p.read_text().splitlines()
    lines[-1] = " ".join(lines[-1].split()[:5])
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(FileFormatError, match="expected 6"):
        read_pass_file(p)


def test_headerless_body_rejected(tmp_path, gs10):
    p = tmp_path / "x.pass"
    empty = PassObservables(times=np.array([0.0]), dphi01=np.array([0.1]),
                            dphi12=np.array([0.2]), doppler=np.array([1e5]),
                            snr=np.array([20.0]))
    write_pass_file(p, empty, gs10)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")  # drop the only data row
    with pytest.raises(FileFormatError, match="no data rows"):
        read_pass_file(p)


def test_iq_partial_frame_rejected(tmp_path):
    ch = np.zeros((3, 16), dtype=np.complex64)
    cap = IqCapture(sample_rate=2e6, fc=11.325e9, t0=0.0, channels=ch)
    p = tmp_path / "x.iq"
    write_iq_file(p, cap)
    raw = p.read_bytes()
    p.write_bytes(raw[:-3])
    with pytest.raises(FileFormatError, match="whole number"):
        read_iq_file(p)


# --- scenario configs ---

def test_parse_scenario_full_document():
    sc = parse_scenario({
        "mode": "sweep",
        "seed": 7,
        "n_passes": 12,
        "station": {"lat_deg": 40.0, "lon_deg": -75.0, "alt_m": 120.0,
                    "yaw_deg": 10.0},
        "array": {"k": 8, "fc_hz": 12.0e9},
        "orbit": {"heights_km": [400, 700], "inclinations_deg": [53, 97],
                  "peak_elevation_deg": [60, 85]},
        "pass": {"duration_s": 20.0, "dt_s": 0.01,
                 "elevation_mask_deg": 25.0},
        "noise": {"phase_std": 0.05, "doppler_std": 20.0},
        "offsets": {"phase_rad": [-1.0, 1.0], "doppler_hz": [-5e4, 5e4]},
        "grid": {"lo_km": 350, "hi_km": 1500, "step_km": 5},
        "sweep_k": [2, 4, 8],
        "yaw_offset_deg": 5.0,
        "calibrate": False,
    })
    assert sc.mode == "sweep"
    assert sc.seed == 7
    assert sc.n_passes == 12
    assert sc.lat == pytest.approx(math.radians(40.0))
    assert sc.lon == pytest.approx(math.radians(-75.0))
    assert sc.alt == 120.0
    assert sc.yaw == pytest.approx(math.radians(10.0))
    assert sc.k == 8
    assert sc.fc == 12.0e9
    assert sc.height_range == (400e3, 700e3)
    assert sc.inclinations == pytest.approx(
        (math.radians(53.0), math.radians(97.0)))
    assert sc.peak_elevation_range == pytest.approx(
        (math.radians(60.0), math.radians(85.0)))
    assert sc.duration == 20.0
    assert sc.dt == 0.01
    assert sc.elevation_mask == pytest.approx(math.radians(25.0))
    assert sc.phase_std == 0.05
    assert sc.doppler_std == 20.0
    assert sc.phase_offset_range == (-1.0, 1.0)
    assert sc.doppler_offset_range == (-5e4, 5e4)
    assert sc.grid == HeightGrid(lo=350e3, hi=1500e3, step=5e3)
    assert sc.sweep_k == (2, 4, 8)
    assert sc.yaw_offset == pytest.approx(math.radians(5.0))
    assert sc.calibrate is False


def test_parse_scenario_empty_doc_is_defaults():
    assert parse_scenario({}) == Scenario()


def test_parse_scenario_unknown_key_names_path():
    with pytest.raises(ConfigError, match=r"station\.bogus_key: unknown key"):
        parse_scenario({"station": {"bogus_key": 1}})
    with pytest.raises(ConfigError, match="unknown key"):
        parse_scenario({"typo_section": {}})


def test_parse_scenario_coerces_numeric_strings():
    # YAML 1.1 reads exponent literals without a sign as plain strings
    sc = parse_scenario({"array": {"fc_hz": "11.325e9"}})
    assert sc.fc == 11.325e9


def test_parse_scenario_rejects_bad_values():
    with pytest.raises(ConfigError, match="n_passes"):
        parse_scenario({"n_passes": 0})
    with pytest.raises(ConfigError, match="mode"):
        parse_scenario({"mode": "bogus"})
    with pytest.raises(ConfigError, match="exceeds"):
        parse_scenario({"orbit": {"heights_km": [700, 400]}})
    with pytest.raises(ConfigError, match="number"):
        parse_scenario({"noise": {"phase_std": True}})
    with pytest.raises(ConfigError, match="integer"):
        parse_scenario({"array": {"k": 2.5}})


def test_load_scenario_round_trip(tmp_path):
    p = tmp_path / "sc.yaml"
    p.write_text("mode: baseline\n"
                 "seed: 3\n"
                 "array:\n"
                 "  fc_hz: 11.325e9\n"
                 "noise:\n"
                 "  phase_std: 0.08\n")
    sc = load_scenario(p)
    assert sc.mode == "baseline"
    assert sc.seed == 3
    assert sc.fc == 11.325e9
    assert sc.phase_std == 0.08


def test_load_scenario_bad_yaml(tmp_path):
    p = tmp_path / "sc.yaml"
    p.write_text("mode: [unclosed\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_scenario(p)


def test_load_scenario_empty_file(tmp_path):
    p = tmp_path / "sc.yaml"
    p.write_text("")
    assert load_scenario(p) == Scenario()
