"""Circular-orbit truth generation: pass geometry and Doppler ground truth.

This module is the oracle for the rest of the package. It propagates an ideal
circular orbit, finds when it crosses a station's sky, and produces the exact
angles, ranges and range rates the estimation chain is later asked to recover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoPassFound
from .geodesy import (
    EARTH,
    SPEED_OF_LIGHT,
    EarthModel,
    GeodeticPosition,
    ecef_to_eci,
    eci_to_ecef_array,
    enu_basis,
    geodetic_to_ecef,
    slant_range_from_height,
)

DEFAULT_SAMPLE_STEP = 0.007       # [s], one observable per STFT hop
DEFAULT_PASS_DURATION = 15.0      # [s], beacon dwell per pass
DEFAULT_ELEVATION_MASK = math.radians(30.0)


@dataclass(frozen=True)
class OrbitSpec:
    """Circular orbit: height above the sphere, plane, and phase at epoch.

    `anomaly0` is the argument of latitude (angle from the ascending node) at
    `epoch`; for a circular orbit that is the only anomaly there is.
    """

    height: float
    inclination: float
    raan: float = 0.0
    anomaly0: float = 0.0
    epoch: float = 0.0

    def __post_init__(self):
        if self.height <= 0.0:
            raise ValueError("orbit height must be positive")

    def radius(self, earth: EarthModel = EARTH) -> float:
        return earth.radius + self.height

    def angular_rate(self, earth: EarthModel = EARTH) -> float:
        """Mean motion sqrt(GM / R^3) [rad/s]."""
        r = self.radius(earth)
        return math.sqrt(earth.gm / r**3)

    def period(self, earth: EarthModel = EARTH) -> float:
        return 2.0 * math.pi / self.angular_rate(earth)


@dataclass(frozen=True)
class PassTruth:
    """Ground truth for one pass, sampled on a uniform time grid.

    All arrays share the first dimension. Positions are meters, angles
    radians, range rate m/s (positive = receding).
    """

    times: np.ndarray          # (N,) [s]
    sat_eci: np.ndarray        # (N, 3)
    sat_ecef: np.ndarray       # (N, 3)
    azimuth: np.ndarray        # (N,)
    elevation: np.ndarray      # (N,)
    slant_range: np.ndarray    # (N,)
    range_rate: np.ndarray     # (N,)

    def __len__(self):
        return len(self.times)

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.elevation))

    @property
    def peak_elevation(self) -> float:
        return float(self.elevation[self.peak_index])

    @property
    def peak_time(self) -> float:
        return float(self.times[self.peak_index])


def _plane_basis(spec: OrbitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Node direction P, in-plane normal Q and orbit normal N (ECI)."""
    si, ci = math.sin(spec.inclination), math.cos(spec.inclination)
    so, co = math.sin(spec.raan), math.cos(spec.raan)
    p = np.array([co, so, 0.0])
    q = np.array([-ci * so, ci * co, si])
    n = np.array([si * so, -si * co, ci])
    return p, q, n


def _states_eci(spec: OrbitSpec, times, earth: EarthModel = EARTH):
    """ECI positions and velocities on the circle at `times`."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    r = spec.radius(earth)
    w = spec.angular_rate(earth)
    u = spec.anomaly0 + w * (times - spec.epoch)
    p, q, _ = _plane_basis(spec)
    cu, su = np.cos(u)[:, None], np.sin(u)[:, None]
    pos = r * (cu * p + su * q)
    vel = r * w * (-su * p + cu * q)
    return pos, vel


def propagate_circular(spec: OrbitSpec, times, earth: EarthModel = EARTH) -> np.ndarray:
    """ECI positions (N, 3) of the orbit at `times` [s]."""
    pos, _ = _states_eci(spec, times, earth)
    return pos


def _observe_geometry(spec: OrbitSpec, gs_ecef: np.ndarray, basis, times,
                      earth: EarthModel, theta0: float):
    """az/el/range/range-rate plus positions for `times` (vectorized)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    pos_eci, vel_eci = _states_eci(spec, times, earth)
    pos_ecef = eci_to_ecef_array(pos_eci, times, earth, theta0)
    # transport theorem: d/dt (Rz(-theta) s) = Rz(-theta) v - omega x s_ecef
    vel_ecef = eci_to_ecef_array(vel_eci, times, earth, theta0)
    vel_ecef[:, 0] += earth.omega * pos_ecef[:, 1]
    vel_ecef[:, 1] -= earth.omega * pos_ecef[:, 0]
    delta = pos_ecef - gs_ecef
    rng = np.linalg.norm(delta, axis=1)
    rate = np.einsum("ij,ij->i", delta, vel_ecef) / rng
    e, n, u = basis
    de = delta @ e
    dn = delta @ n
    du = delta @ u
    az = np.mod(np.arctan2(de, dn), 2.0 * math.pi)
    el = np.arctan2(du, np.hypot(de, dn))
    return pos_eci, pos_ecef, az, el, rng, rate


def observe_pass(spec: OrbitSpec, station, dt: float = DEFAULT_SAMPLE_STEP,
                 elevation_mask: float = DEFAULT_ELEVATION_MASK,
                 duration: float = DEFAULT_PASS_DURATION,
                 earth: EarthModel = EARTH, theta0: float = 0.0) -> PassTruth:
    """Sample the pass window centred on the maximum-elevation epoch.

    Searches one orbital period around the epoch for the highest elevation,
    refines that epoch to ~1 ms, then samples a window of `duration` seconds
    centred on it with step `dt`. Samples below `elevation_mask` at the window
    edges are trimmed so the pass stays above the mask throughout.

    Parameters
    ----------
    spec : OrbitSpec
    station : GeodeticPosition or object with a ``position`` attribute
    dt : float
        Sample step [s].
    elevation_mask : float
        Minimum usable elevation [rad].
    duration : float
        Window length [s] centred on the peak.

    Raises
    ------
    NoPassFound
        If the orbit never exceeds the mask over one period.
    """
    if hasattr(station, "position"):
        station = station.position
    if not isinstance(station, GeodeticPosition):
        raise TypeError("station must be a GeodeticPosition")
    gs_ecef = geodetic_to_ecef(station, earth).to_array()
    basis = enu_basis(station)

    period = spec.period(earth)
    coarse = np.arange(spec.epoch - period / 2.0, spec.epoch + period / 2.0, 2.0)
    el_c = _observe_geometry(spec, gs_ecef, basis, coarse, earth, theta0)[3]
    i_best = int(np.argmax(el_c))

    fine = coarse[i_best] + np.arange(-3.0, 3.0, 1e-3)
    el_f = _observe_geometry(spec, gs_ecef, basis, fine, earth, theta0)[3]
    t_peak = float(fine[np.argmax(el_f)])
    if float(np.max(el_f)) <= elevation_mask:
        raise NoPassFound(
            f"peak elevation {math.degrees(np.max(el_f)):.1f} deg is below the "
            f"{math.degrees(elevation_mask):.1f} deg mask"
        )

    half_steps = int(math.floor(duration / 2.0 / dt))
    times = t_peak + np.arange(-half_steps, half_steps + 1) * dt
    pos_eci, pos_ecef, az, el, rng, rate = _observe_geometry(
        spec, gs_ecef, basis, times, earth, theta0)

    above = np.flatnonzero(el > elevation_mask)
    if len(above) == 0:
        raise NoPassFound("no samples above the elevation mask")
    sl = slice(above[0], above[-1] + 1)
    return PassTruth(
        times=times[sl], sat_eci=pos_eci[sl], sat_ecef=pos_ecef[sl],
        azimuth=az[sl], elevation=el[sl], slant_range=rng[sl],
        range_rate=rate[sl],
    )


def true_doppler(truth: PassTruth, fc: float) -> np.ndarray:
    """Doppler shift [Hz] of a carrier at `fc` along the pass.

    f_D(t) = -(fc / c) * range_rate(t); positive while approaching.
    """
    return -(fc / SPEED_OF_LIGHT) * truth.range_rate


def orbit_above_station(station: GeodeticPosition, height: float,
                        inclination: float, peak_elevation: float,
                        side: int = +1, direction: int = +1,
                        t_mid: float = 0.0, earth: EarthModel = EARTH,
                        theta0: float = 0.0) -> OrbitSpec:
    """Construct a circular orbit whose pass peaks near `peak_elevation`.

    Places the orbit plane so that, at `t_mid`, the closest point of the orbit
    to the station's zenith sits at the geocentric offset corresponding to the
    requested peak elevation. Earth rotation during the short pass makes the
    realized peak drift from the target by a fraction of a degree; callers that
    need the exact geometry should read it back from :func:`observe_pass`.

    Parameters
    ----------
    station : GeodeticPosition
    height, inclination : float
        Orbit height [m] and inclination [rad].
    peak_elevation : float
        Target elevation at closest approach [rad].
    side : int
        +1/-1, which side of the ground track the station falls on.
    direction : int
        +1/-1, selects one of the two great-circle crossing solutions.
    t_mid : float
        Epoch of closest approach [s].

    Raises
    ------
    ValueError
        If no plane with this inclination achieves the requested offset
        (e.g. inclination well below the station latitude).
    """
    gs_eci = ecef_to_eci(geodetic_to_ecef(station, earth), t_mid, earth, theta0)
    g = gs_eci.to_array()
    g /= np.linalg.norm(g)
    lat_g = math.asin(g[2])
    alpha_g = math.atan2(g[1], g[0])

    # geocentric angle between station and sub-satellite point at the peak
    r_peak = slant_range_from_height(peak_elevation, height, earth)
    beta = math.asin(r_peak * math.cos(peak_elevation) / (earth.radius + height))

    si, ci = math.sin(inclination), math.cos(inclination)
    if abs(si) < 1e-12 or abs(math.cos(lat_g)) < 1e-12:
        raise ValueError("degenerate geometry: equatorial orbit or polar station")
    q = (math.sin(side * beta) - ci * math.sin(lat_g)) / (si * math.cos(lat_g))
    if abs(q) > 1.0:
        raise ValueError(
            f"inclination {math.degrees(inclination):.1f} deg cannot reach "
            f"offset {math.degrees(beta):.2f} deg at station latitude "
            f"{math.degrees(lat_g):.1f} deg"
        )
    if direction >= 0:
        raan = alpha_g + math.asin(q)
    else:
        raan = alpha_g + math.pi - math.asin(q)

    spec0 = OrbitSpec(height=height, inclination=inclination,
                      raan=raan % (2.0 * math.pi), anomaly0=0.0, epoch=t_mid)
    p, qv, n = _plane_basis(spec0)
    s = g - (g @ n) * n
    s /= np.linalg.norm(s)
    u_mid = math.atan2(s @ qv, s @ p)
    return OrbitSpec(height=height, inclination=inclination,
                     raan=spec0.raan, anomaly0=u_mid % (2.0 * math.pi),
                     epoch=t_mid)
