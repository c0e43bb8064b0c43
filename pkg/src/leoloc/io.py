"""File formats: pass observations, truth, results, IQ captures, scenarios.

Everything numeric is written with repr(), which in Python produces the
shortest string that parses back to the identical float, so text round-trips
are bit-exact. Binary IQ payloads are raw little-endian complex64 frames,
sample-major, behind a small text header terminated by an ``end_header``
line.

Scenario files are YAML with unit-suffixed keys (degrees, km) that load into
the SI/radian `Scenario` dataclass. Validation failures raise ConfigError
with the offending field path, e.g. ``orbit.heights_km``.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np
import yaml

from .aoa import ArrayGeometry
from .dsar import CandidateScore, DopplerFit
from .errors import ConfigError, FileFormatError
from .geodesy import SPEED_OF_LIGHT, GeodeticPosition
from .montecarlo import Scenario
from .orbitsim import OrbitSpec, PassTruth
from .pipeline import GroundStation, LocalizationResult, LocalizeDiagnostics
from .ranging import HeightGrid
from .signalproc import IqCapture, PassObservables

PASS_MAGIC = "leoloc pass v1"
TRUTH_MAGIC = "leoloc truth v1"
RESULT_MAGIC = "leoloc result v1"
IQ_MAGIC = "leoloc iq v1"
END_HEADER = "end_header"


# ---------------------------------------------------------------- helpers

def _fmt(x: float) -> str:
    return repr(float(x))


def _read_header(lines: list[str], path: str, magic: str) -> tuple[dict, int]:
    """Parse `key value` lines up to end_header; returns (fields, body start)."""
    if not lines or lines[0].strip() != magic:
        raise FileFormatError(f"{path}: missing '{magic}' header line")
    fields: dict[str, str] = {}
    for i, line in enumerate(lines[1:], start=1):
        s = line.strip()
        if s == END_HEADER:
            return fields, i + 1
        if not s or s.startswith("#"):
            continue
        parts = s.split(None, 1)
        if len(parts) != 2:
            raise FileFormatError(f"{path}: malformed header line {i+1}: {s!r}")
        fields[parts[0]] = parts[1]
    raise FileFormatError(f"{path}: header never terminated by '{END_HEADER}'")


def _header_floats(fields: dict, names: list[str], path: str) -> list[float]:
    out = []
    for name in names:
        if name not in fields:
            raise FileFormatError(f"{path}: header field '{name}' missing")
        try:
            out.append(float(fields[name]))
        except ValueError:
            raise FileFormatError(
                f"{path}: header field '{name}' is not a number: "
                f"{fields[name]!r}") from None
    return out


def _body_matrix(lines: list[str], start: int, ncol: int,
                 path: str) -> np.ndarray:
    rows = []
    for i, line in enumerate(lines[start:], start=start):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != ncol:
            raise FileFormatError(
                f"{path}: row at line {i+1} has {len(parts)} fields, "
                f"expected {ncol}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise FileFormatError(
                f"{path}: non-numeric value at line {i+1}") from None
    if not rows:
        raise FileFormatError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


# ------------------------------------------------------ pass observations

def write_pass_file(path: str, obs: PassObservables,
                    gs: GroundStation) -> None:
    """One pass of front-end observables plus the station that took them."""
    arr = gs.array
    dt = float(np.median(np.diff(obs.times))) if len(obs) > 1 else 0.0
    with open(path, "w") as f:
        f.write(PASS_MAGIC + "\n")
        f.write(f"lat {_fmt(gs.position.lat)}\n")
        f.write(f"lon {_fmt(gs.position.lon)}\n")
        f.write(f"alt {_fmt(gs.position.alt)}\n")
        f.write(f"yaw {_fmt(arr.yaw)}\n")
        f.write(f"spacing {_fmt(arr.spacing)}\n")
        f.write(f"wavelength {_fmt(arr.wavelength)}\n")
        f.write(f"fc {_fmt(SPEED_OF_LIGHT / arr.wavelength)}\n")
        f.write(f"dt {_fmt(dt)}\n")
        f.write(END_HEADER + "\n")
        f.write("# t dphi01 dphi12 doppler snr valid\n")
        for i in range(len(obs)):
            f.write(f"{_fmt(obs.times[i])} {_fmt(obs.dphi01[i])} "
                    f"{_fmt(obs.dphi12[i])} {_fmt(obs.doppler[i])} "
                    f"{_fmt(obs.snr[i])} {int(obs.valid[i])}\n")


def read_pass_file(path: str) -> tuple[PassObservables, GroundStation, float]:
    with open(path) as f:
        lines = f.readlines()
    fields, start = _read_header(lines, path, PASS_MAGIC)
    lat, lon, alt, yaw, spacing, wavelength, fc, _dt = _header_floats(
        fields, ["lat", "lon", "alt", "yaw", "spacing", "wavelength", "fc",
                 "dt"], path)
    body = _body_matrix(lines, start, 6, path)
    obs = PassObservables(times=body[:, 0], dphi01=body[:, 1],
                          dphi12=body[:, 2], doppler=body[:, 3],
                          snr=body[:, 4], valid=body[:, 5] != 0.0)
    gs = GroundStation(GeodeticPosition(lat, lon, alt),
                       ArrayGeometry(spacing, wavelength, yaw))
    return obs, gs, fc


# ------------------------------------------------------------ pass truth

def write_truth_file(path: str, truth: PassTruth, spec: OrbitSpec) -> None:
    with open(path, "w") as f:
        f.write(TRUTH_MAGIC + "\n")
        f.write(f"height {_fmt(spec.height)}\n")
        f.write(f"inclination {_fmt(spec.inclination)}\n")
        f.write(f"raan {_fmt(spec.raan)}\n")
        f.write(f"anomaly0 {_fmt(spec.anomaly0)}\n")
        f.write(f"epoch {_fmt(spec.epoch)}\n")
        f.write(END_HEADER + "\n")
        f.write("# t az el r rdot eci_xyz ecef_xyz\n")
        for i in range(len(truth.times)):
            cols = [truth.times[i], truth.azimuth[i], truth.elevation[i],
                    truth.slant_range[i], truth.range_rate[i],
                    *truth.sat_eci[i], *truth.sat_ecef[i]]
            f.write(" ".join(_fmt(c) for c in cols) + "\n")


def read_truth_file(path: str) -> tuple[PassTruth, OrbitSpec]:
    with open(path) as f:
        lines = f.readlines()
    fields, start = _read_header(lines, path, TRUTH_MAGIC)
    height, incl, raan, anom, epoch = _header_floats(
        fields, ["height", "inclination", "raan", "anomaly0", "epoch"], path)
    body = _body_matrix(lines, start, 11, path)
    truth = PassTruth(times=body[:, 0], sat_eci=body[:, 5:8],
                      sat_ecef=body[:, 8:11], azimuth=body[:, 1],
                      elevation=body[:, 2], slant_range=body[:, 3],
                      range_rate=body[:, 4])
    spec = OrbitSpec(height=height, inclination=incl, raan=raan,
                     anomaly0=anom, epoch=epoch)
    return truth, spec


# ---------------------------------------------------------------- results

def write_result_file(path: str, res: LocalizationResult) -> None:
    """Winning trajectory plus selection diagnostics.

    Score rows capture each candidate's filter fate for post-mortems; the
    measured Doppler fit is not persisted (re-derivable from the pass file).
    """
    d = res.diagnostics
    n = len(res.times)
    # expand the compact (n_valid, 3) trajectory back onto the full grid
    xyz = np.full((n, 3), math.nan)
    xyz[res.valid] = res.trajectory
    with open(path, "w") as f:
        f.write(RESULT_MAGIC + "\n")
        f.write(f"winner_i {res.winner[0]}\n")
        f.write(f"winner_j {res.winner[1]}\n")
        f.write(f"h_star {_fmt(res.h_star)}\n")
        f.write(f"residual {_fmt(res.residual)}\n")
        f.write(f"n_candidates {d.n_candidates}\n")
        f.write(f"n_after_elevation {d.n_after_elevation}\n")
        f.write(f"n_after_timing {d.n_after_timing}\n")
        f.write(f"n_ranged {d.n_ranged}\n")
        f.write(f"n_scores {len(d.scores)}\n")
        for s in d.scores:
            f.write(f"score {s.ambiguity[0]} {s.ambiguity[1]} {_fmt(s.loss)} "
                    f"{int(s.passed_elevation)} {int(s.passed_timing)}\n")
        f.write(END_HEADER + "\n")
        f.write("# t az el valid r x y z\n")
        for i in range(n):
            f.write(f"{_fmt(res.times[i])} {_fmt(res.azimuth[i])} "
                    f"{_fmt(res.elevation[i])} {int(res.valid[i])} "
                    f"{_fmt(res.r_track[i])} {_fmt(xyz[i, 0])} "
                    f"{_fmt(xyz[i, 1])} {_fmt(xyz[i, 2])}\n")


def read_result_file(path: str) -> LocalizationResult:
    """Rebuild a LocalizationResult; diagnostics.measured_fit is a stub."""
    with open(path) as f:
        lines = f.readlines()
    # score lines share the header's key-value shape but repeat, so collect
    # them by hand before the generic parse
    scores: list[CandidateScore] = []
    kept = []
    for line in lines:
        parts = line.split()
        if parts and parts[0] == "score":
            if len(parts) != 6:
                raise FileFormatError(f"{path}: malformed score line: "
                                      f"{line.strip()!r}")
            scores.append(CandidateScore(
                ambiguity=(int(parts[1]), int(parts[2])),
                loss=float(parts[3]), passed_elevation=parts[4] != "0",
                passed_timing=parts[5] != "0"))
        else:
            kept.append(line)
    fields, start = _read_header(kept, path, RESULT_MAGIC)
    for name in ("winner_i", "winner_j", "n_candidates", "n_after_elevation",
                 "n_after_timing", "n_ranged", "h_star", "residual"):
        if name not in fields:
            raise FileFormatError(f"{path}: header field '{name}' missing")
    body = _body_matrix(kept, start, 8, path)
    valid = body[:, 3] != 0.0
    stub_fit = DopplerFit(t_ref=0.0, coeffs=np.zeros(4),
                          rate_coeffs=np.zeros(3), t_maxel=0.0,
                          window=(0.0, 0.0), clamped=False)
    heights = {s.ambiguity: math.nan for s in scores}
    diag = LocalizeDiagnostics(
        n_candidates=int(fields["n_candidates"]),
        n_after_elevation=int(fields["n_after_elevation"]),
        n_after_timing=int(fields["n_after_timing"]),
        n_ranged=int(fields["n_ranged"]),
        scores=scores, heights=heights, measured_fit=stub_fit)
    return LocalizationResult(
        winner=(int(fields["winner_i"]), int(fields["winner_j"])),
        times=body[:, 0], azimuth=body[:, 1], elevation=body[:, 2],
        valid=valid, h_star=float(fields["h_star"]),
        residual=float(fields["residual"]), r_track=body[:, 4],
        trajectory=body[valid][:, 5:8], diagnostics=diag)


# ------------------------------------------------------------ IQ captures

def write_iq_file(path: str, cap: IqCapture) -> None:
    """Text header, then raw interleaved complex64 frames (ch0, ch1, ...)."""
    header = (f"{IQ_MAGIC}\n"
              f"sample_rate {_fmt(cap.sample_rate)}\n"
              f"fc {_fmt(cap.fc)}\n"
              f"t0 {_fmt(cap.t0)}\n"
              f"n_channels {cap.n_channels}\n"
              f"{END_HEADER}\n")
    payload = np.ascontiguousarray(
        cap.channels.T.astype(np.complex64)).tobytes()
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(payload)


def read_iq_file(path: str) -> IqCapture:
    with open(path, "rb") as f:
        first = f.readline().decode("ascii", errors="replace").strip()
        if first != IQ_MAGIC:
            raise FileFormatError(f"{path}: missing '{IQ_MAGIC}' header line")
        fields: dict[str, str] = {}
        while True:
            raw = f.readline()
            if not raw:
                raise FileFormatError(
                    f"{path}: header never terminated by '{END_HEADER}'")
            s = raw.decode("ascii", errors="replace").strip()
            if s == END_HEADER:
                break
            parts = s.split(None, 1)
            if len(parts) != 2:
                raise FileFormatError(f"{path}: malformed header line: {s!r}")
            fields[parts[0]] = parts[1]
        payload = f.read()
    sample_rate, fc, t0 = _header_floats(fields, ["sample_rate", "fc", "t0"],
                                         path)
    try:
        n_ch = int(fields["n_channels"])
    except (KeyError, ValueError):
        raise FileFormatError(f"{path}: bad or missing n_channels") from None
    if n_ch < 1:
        raise FileFormatError(f"{path}: n_channels must be >= 1, got {n_ch}")
    if len(payload) % (8 * n_ch) != 0:
        raise FileFormatError(
            f"{path}: payload of {len(payload)} bytes is not a whole number "
            f"of {n_ch}-channel complex64 frames")
    frames = np.frombuffer(payload, dtype=np.complex64).reshape(-1, n_ch)
    return IqCapture(sample_rate=sample_rate, fc=fc, t0=t0,
                     channels=np.ascontiguousarray(frames.T))


# ------------------------------------------------------------- scenarios

def _want(section: dict, key: str, path: str, kind) -> Any:
    if key not in section:
        return None
    val = section[key]
    if kind is float:
        # PyYAML resolves e-notation without a sign ("11.325e9") as str;
        # coerce rather than surprise the user
        if isinstance(val, bool):
            raise ConfigError(path, f"expected a number, got {val!r}")
        if isinstance(val, (int, float)):
            return float(val)
        if isinstance(val, str):
            try:
                return float(val)
            except ValueError:
                raise ConfigError(path,
                                  f"expected a number, got {val!r}") from None
        raise ConfigError(path, f"expected a number, got {type(val).__name__}")
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(path, f"expected an integer, got {val!r}")
        return val
    if kind is bool:
        if not isinstance(val, bool):
            raise ConfigError(path, f"expected true/false, got {val!r}")
        return val
    if kind is str:
        if not isinstance(val, str):
            raise ConfigError(path, f"expected a string, got {val!r}")
        return val
    raise AssertionError(kind)


def _want_pair(section: dict, key: str, path: str) -> tuple | None:
    if key not in section:
        return None
    val = section[key]
    if not isinstance(val, (list, tuple)) or len(val) != 2:
        raise ConfigError(path, f"expected [lo, hi], got {val!r}")
    lo = _want({"x": val[0]}, "x", path, float)
    hi = _want({"x": val[1]}, "x", path, float)
    if lo > hi:
        raise ConfigError(path, f"lo {lo} exceeds hi {hi}")
    return lo, hi


def _check_keys(section: dict, allowed: set, path: str) -> None:
    for key in section:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ConfigError(where, "unknown key")


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name)
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected a mapping")
    return sec


def parse_scenario(doc: dict) -> Scenario:
    """Validate a parsed YAML mapping and build a Scenario from it.

    Unknown keys are errors (typo protection); missing ones keep defaults.
    """
    if not isinstance(doc, dict):
        raise ConfigError("scenario", "top level must be a mapping")
    _check_keys(doc, {"mode", "seed", "n_passes", "station", "array",
                      "orbit", "pass", "noise", "offsets", "grid",
                      "sweep_k", "yaw_offset_deg", "calibrate"}, "")
    sc = Scenario()
    kw: dict[str, Any] = {}

    mode = _want(doc, "mode", "mode", str)
    if mode is not None:
        if mode not in ("sparse", "baseline", "sweep", "yaw-offset"):
            raise ConfigError("mode", f"unknown mode {mode!r}")
        kw["mode"] = mode
    seed = _want(doc, "seed", "seed", int)
    if seed is not None:
        kw["seed"] = seed
    n = _want(doc, "n_passes", "n_passes", int)
    if n is not None:
        if n < 1:
            raise ConfigError("n_passes", f"must be >= 1, got {n}")
        kw["n_passes"] = n

    st = _section(doc, "station")
    _check_keys(st, {"lat_deg", "lon_deg", "alt_m", "yaw_deg"}, "station")
    for src, dst, scale in (("lat_deg", "lat", math.pi / 180.0),
                            ("lon_deg", "lon", math.pi / 180.0),
                            ("alt_m", "alt", 1.0),
                            ("yaw_deg", "yaw", math.pi / 180.0)):
        v = _want(st, src, f"station.{src}", float)
        if v is not None:
            kw[dst] = v * scale

    ar = _section(doc, "array")
    _check_keys(ar, {"k", "fc_hz"}, "array")
    k = _want(ar, "k", "array.k", int)
    if k is not None:
        if k < 1:
            raise ConfigError("array.k", f"must be >= 1, got {k}")
        kw["k"] = k
    fc = _want(ar, "fc_hz", "array.fc_hz", float)
    if fc is not None:
        if fc <= 0:
            raise ConfigError("array.fc_hz", f"must be positive, got {fc}")
        kw["fc"] = fc

    orb = _section(doc, "orbit")
    _check_keys(orb, {"heights_km", "inclinations_deg", "peak_elevation_deg"},
                "orbit")
    pair = _want_pair(orb, "heights_km", "orbit.heights_km")
    if pair is not None:
        if pair[0] <= 0:
            raise ConfigError("orbit.heights_km", "heights must be positive")
        kw["height_range"] = (pair[0] * 1e3, pair[1] * 1e3)
    if "inclinations_deg" in orb:
        raw = orb["inclinations_deg"]
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError("orbit.inclinations_deg",
                              f"expected a non-empty list, got {raw!r}")
        vals = tuple(math.radians(_want({"x": v}, "x",
                                        "orbit.inclinations_deg", float))
                     for v in raw)
        kw["inclinations"] = vals
    pair = _want_pair(orb, "peak_elevation_deg", "orbit.peak_elevation_deg")
    if pair is not None:
        if not (0.0 < pair[0] and pair[1] <= 90.0):
            raise ConfigError("orbit.peak_elevation_deg",
                              "range must lie in (0, 90] degrees")
        kw["peak_elevation_range"] = (math.radians(pair[0]),
                                      math.radians(pair[1]))

    pw = _section(doc, "pass")
    _check_keys(pw, {"duration_s", "dt_s", "elevation_mask_deg"}, "pass")
    v = _want(pw, "duration_s", "pass.duration_s", float)
    if v is not None:
        if v <= 0:
            raise ConfigError("pass.duration_s", f"must be positive, got {v}")
        kw["duration"] = v
    v = _want(pw, "dt_s", "pass.dt_s", float)
    if v is not None:
        if v <= 0:
            raise ConfigError("pass.dt_s", f"must be positive, got {v}")
        kw["dt"] = v
    v = _want(pw, "elevation_mask_deg", "pass.elevation_mask_deg", float)
    if v is not None:
        if not (0.0 <= v < 90.0):
            raise ConfigError("pass.elevation_mask_deg",
                              f"must lie in [0, 90), got {v}")
        kw["elevation_mask"] = math.radians(v)

    nz = _section(doc, "noise")
    _check_keys(nz, {"phase_std", "doppler_std"}, "noise")
    for src, dst in (("phase_std", "phase_std"), ("doppler_std",
                                                  "doppler_std")):
        v = _want(nz, src, f"noise.{src}", float)
        if v is not None:
            if v < 0:
                raise ConfigError(f"noise.{src}",
                                  f"must be >= 0, got {v}")
            kw[dst] = v

    off = _section(doc, "offsets")
    _check_keys(off, {"phase_rad", "doppler_hz"}, "offsets")
    pair = _want_pair(off, "phase_rad", "offsets.phase_rad")
    if pair is not None:
        kw["phase_offset_range"] = pair
    pair = _want_pair(off, "doppler_hz", "offsets.doppler_hz")
    if pair is not None:
        kw["doppler_offset_range"] = pair

    gr = _section(doc, "grid")
    _check_keys(gr, {"lo_km", "hi_km", "step_km"}, "grid")
    glo = _want(gr, "lo_km", "grid.lo_km", float)
    ghi = _want(gr, "hi_km", "grid.hi_km", float)
    gst = _want(gr, "step_km", "grid.step_km", float)
    if any(v is not None for v in (glo, ghi, gst)):
        base = sc.grid
        glo = base.lo if glo is None else glo * 1e3
        ghi = base.hi if ghi is None else ghi * 1e3
        gst = base.step if gst is None else gst * 1e3
        if not (0.0 < glo < ghi):
            raise ConfigError("grid.lo_km", "need 0 < lo < hi")
        if gst <= 0:
            raise ConfigError("grid.step_km", f"must be positive, got {gst}")
        kw["grid"] = HeightGrid(lo=glo, hi=ghi, step=gst)

    if "sweep_k" in doc:
        raw = doc["sweep_k"]
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError("sweep_k",
                              f"expected a non-empty list, got {raw!r}")
        ks = []
        for v in raw:
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError("sweep_k",
                                  f"entries must be integers >= 1, got {v!r}")
            ks.append(v)
        kw["sweep_k"] = tuple(ks)
    v = _want(doc, "yaw_offset_deg", "yaw_offset_deg", float)
    if v is not None:
        kw["yaw_offset"] = math.radians(v)
    v = _want(doc, "calibrate", "calibrate", bool)
    if v is not None:
        kw["calibrate"] = v

    return Scenario(**kw)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as f:
            doc = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError("scenario", f"not parseable as YAML: {e}") from None
    if doc is None:
        doc = {}
    return parse_scenario(doc)
