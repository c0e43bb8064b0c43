"""Slant range via the Newtonian circular-orbit constraint.

Given an angle track and a hypothesised orbit height h, every sample maps to
an ECEF position through the spherical law of cosines. Rotating that
trajectory into the inertial frame gives a speed estimate v(h); for the true
height, v(h)^2 * (Re + h) equals GM. The height search scans a grid and keeps
the height with the smallest absolute constraint residual.

Angle tracks are differentiated only after smoothing: the per-sample angle
noise of a phase interferometer, scaled by hundreds of kilometres of range
and divided by a 7 ms step, would otherwise swamp the orbital speed entirely.
Smoothing fits low-order polynomials to the line-of-sight unit vector's ENU
components (the components stay smooth through zenith, where azimuth itself
kinks), then renormalizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aoa import AoATrack
from .errors import FlatObjective, InsufficientSamples
from .geodesy import (
    EARTH,
    EarthModel,
    GeodeticPosition,
    azel_to_enu_unit,
    ecef_to_eci_array,
    enu_basis,
    geodetic_to_ecef,
    slant_range_from_height,
)

SMOOTHING_DEGREE = 2
SMOOTHING_MAX_DEGREE = 4
COEFF_SIGNIFICANCE = 3.5


@dataclass(frozen=True)
class HeightGrid:
    """Search grid for the orbit height [m]."""

    lo: float = 300.0e3
    hi: float = 2000.0e3
    step: float = 2.0e3

    def __post_init__(self):
        if not (0.0 < self.lo < self.hi) or self.step <= 0.0:
            raise ValueError("need 0 < lo < hi and positive step")

    def heights(self) -> np.ndarray:
        n = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return self.lo + self.step * np.arange(n)


DEFAULT_HEIGHT_GRID = HeightGrid()


@dataclass
class RangeEstimate:
    """Outcome of the height search for one track."""

    height: float          # h* [m]
    residual: float        # |v^2 (Re+h*) - GM| at the winner [m^3/s^2]
    r_track: np.ndarray    # slant range at h* per track sample [m], NaN invalid


def _station_position(gs) -> GeodeticPosition:
    if hasattr(gs, "position"):
        gs = gs.position
    if not isinstance(gs, GeodeticPosition):
        raise TypeError("station must be a GeodeticPosition")
    return gs


def fitted_los(track: AoATrack, degree: int = SMOOTHING_DEGREE):
    """Polynomial-smoothed line of sight at the track's valid samples.

    Fits each ENU component of the unit line of sight with a least-squares
    polynomial over the valid samples, renormalizes, and returns
    (times, elevation, enu_units, valid_indices). Needs >= 3 valid samples.

    The fit keeps terms up to `degree` unconditionally and admits terms up
    to SMOOTHING_MAX_DEGREE per component only where the coefficient exceeds
    COEFF_SIGNIFICANCE times its standard error (noise scale taken from
    second differences of the raw component). Downstream the curve is
    differentiated twice, so a noise-born cubic coefficient would turn into
    thousands of Hz/s of apparent Doppler-rate error, while a stiff
    quadratic misses the genuine shape of near-zenith passes; the
    significance gate picks per track which regime applies.
    """
    idx = np.flatnonzero(track.valid)
    if len(idx) < 3:
        raise InsufficientSamples(
            f"need at least 3 valid samples to differentiate, got {len(idx)}"
        )
    t = np.asarray(track.times, dtype=float)[idx]
    enu = azel_to_enu_unit(track.azimuth[idx], track.elevation[idx])
    # centre/scale the abscissa by hand; polyfit conditioning suffers
    # otherwise. abs keeps the scale positive for tracks stored newest-first.
    tc = 0.5 * (t[0] + t[-1])
    ts = max(0.5 * abs(t[-1] - t[0]), 1e-9)
    tau = (t - tc) / ts
    deg_hi = min(SMOOTHING_MAX_DEGREE, len(idx) - 1)
    deg_lo = min(degree, deg_hi)
    # Legendre basis: near-orthogonal columns on a dense symmetric grid, so
    # each coefficient carries its own standard error (raw powers tau^2 and
    # tau^4 are ~95% collinear, which would both mask genuine terms and let
    # noise-born ones through)
    vand = np.polynomial.legendre.legvander(tau, deg_hi)
    coeffs, *_ = np.linalg.lstsq(vand, enu, rcond=None)
    if deg_hi > deg_lo:
        # second differences of the smooth part are ~curvature*dt^2, many
        # orders below the noise floor, so they estimate sigma cleanly
        sigma = np.std(np.diff(enu, 2, axis=0), axis=0) / math.sqrt(6.0)
        gain = np.sqrt(np.diag(np.linalg.inv(vand.T @ vand))[deg_lo + 1:])
        drop = (np.abs(coeffs[deg_lo + 1:])
                <= COEFF_SIGNIFICANCE * gain[:, None] * sigma[None, :])
        for j in range(enu.shape[1]):
            if drop[:, j].any():
                keep = np.concatenate(
                    [np.ones(deg_lo + 1, dtype=bool), ~drop[:, j]])
                sub, *_ = np.linalg.lstsq(vand[:, keep], enu[:, j],
                                          rcond=None)
                cj = np.zeros(deg_hi + 1)
                cj[keep] = sub
                coeffs[:, j] = cj
    smooth = vand @ coeffs
    smooth /= np.linalg.norm(smooth, axis=1, keepdims=True)
    elevation = np.arcsin(np.clip(smooth[:, 2], -1.0, 1.0))
    return t, elevation, smooth, idx


class _SpeedContext:
    """Precomputed per-track quantities for the height scan.

    The inertial satellite position is G(t) + r(t; h) M(t) with G the rotated
    station and M the rotated line of sight; only the scalar r depends on h,
    so central differences reduce to shifted slices of one (H, N) range array
    against fixed dot products.
    """

    def __init__(self, track: AoATrack, station: GeodeticPosition,
                 earth: EarthModel, theta0: float):
        t, el, enu, _ = fitted_los(track)
        basis = np.vstack(enu_basis(station))        # rows e, n, u
        los_ecef = enu @ basis
        gs_ecef = geodetic_to_ecef(station, earth).to_array()

        self.earth = earth
        self.elevation = el
        g_eci = ecef_to_eci_array(np.broadcast_to(gs_ecef, (len(t), 3)), t,
                                  earth, theta0)
        m_eci = ecef_to_eci_array(los_ecef, t, earth, theta0)
        w = 1.0 / (t[2:] - t[:-2])
        a = (g_eci[2:] - g_eci[:-2]) * w[:, None]
        self.w = w
        self.a_sq = np.einsum("ij,ij->i", a, a)
        self.a_dot_mp = np.einsum("ij,ij->i", a, m_eci[2:])
        self.a_dot_mm = np.einsum("ij,ij->i", a, m_eci[:-2])
        self.mp_dot_mm = np.einsum("ij,ij->i", m_eci[2:], m_eci[:-2])

    def mean_speed(self, heights: np.ndarray) -> np.ndarray:
        """Mean central-difference speed [m/s] for each height (vectorized)."""
        r = slant_range_from_height(self.elevation[None, :],
                                    np.atleast_1d(heights)[:, None], self.earth)
        rp, rm = r[:, 2:], r[:, :-2]
        sq = (self.a_sq
              + 2.0 * self.w * (rp * self.a_dot_mp - rm * self.a_dot_mm)
              + self.w**2 * (rp**2 - 2.0 * rp * rm * self.mp_dot_mm + rm**2))
        return np.sqrt(np.maximum(sq, 0.0)).mean(axis=1)


def track_to_ecef(track: AoATrack, gs, height: float,
                  earth: EarthModel = EARTH) -> np.ndarray:
    """Map a track to ECEF positions assuming orbit height `height`.

    s(t) = gs + r(t) * los(t) with r from the law-of-cosines slant range at
    the sample's elevation. Returns (N, 3) with NaN rows at invalid samples.
    """
    station = _station_position(gs)
    gs_ecef = geodetic_to_ecef(station, earth).to_array()
    basis = np.vstack(enu_basis(station))
    out = np.full((len(track), 3), np.nan)
    idx = np.flatnonzero(track.valid)
    if len(idx) == 0:
        return out
    el = track.elevation[idx]
    r = slant_range_from_height(el, height, earth)
    los = azel_to_enu_unit(track.azimuth[idx], el) @ basis
    out[idx] = gs_ecef + np.atleast_1d(r)[:, None] * los
    return out


def mean_speed(track: AoATrack, gs, height: float, earth: EarthModel = EARTH,
               theta0: float = 0.0) -> float:
    """Mean inertial speed of the track's trajectory at the given height."""
    ctx = _SpeedContext(track, _station_position(gs), earth, theta0)
    return float(ctx.mean_speed(np.array([height]))[0])


def newton_residual(speed: float, orbit_radius: float,
                    earth: EarthModel = EARTH) -> float:
    """|v^2 R - GM|, the circular-orbit constraint violation."""
    return abs(speed * speed * orbit_radius - earth.gm)


def gravimetric_residual(track: AoATrack, gs, height: float,
                         earth: EarthModel = EARTH, theta0: float = 0.0) -> float:
    """Constraint residual for one candidate height."""
    v = mean_speed(track, gs, height, earth, theta0)
    return newton_residual(v, earth.radius + height, earth)


def estimate_height(track: AoATrack, gs, grid: HeightGrid = DEFAULT_HEIGHT_GRID,
                    earth: EarthModel = EARTH, theta0: float = 0.0) -> RangeEstimate:
    """Grid-search the orbit height minimizing the Newtonian residual.

    Ties break toward the lower height (first grid hit). Raises FlatObjective
    when the residual varies by less than 1% across the whole grid, which
    happens for tracks with no usable apparent motion.
    """
    station = _station_position(gs)
    ctx = _SpeedContext(track, station, earth, theta0)
    heights = grid.heights()
    v = ctx.mean_speed(heights)
    residual = np.abs(v * v * (earth.radius + heights) - earth.gm)
    lo, hi = float(residual.min()), float(residual.max())
    if hi <= 0.0 or (hi - lo) < 0.01 * hi:
        raise FlatObjective(
            f"height residual varies {100.0 * (hi - lo) / hi if hi else 0.0:.2f}% "
            "across the grid"
        )
    best = int(np.argmin(residual))
    h_star = float(heights[best])

    r_track = np.full(len(track), np.nan)
    idx = np.flatnonzero(track.valid)
    r_track[idx] = slant_range_from_height(track.elevation[idx], h_star, earth)
    return RangeEstimate(height=h_star, residual=float(residual[best]),
                         r_track=r_track)
