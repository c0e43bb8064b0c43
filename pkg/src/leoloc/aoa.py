"""Angle of arrival from a three-antenna L-array, with grating-lobe handling.

The array has two orthogonal baselines of spacing d. With wavelength lambda
and elevation/azimuth (theta, psi) measured at the array (azimuth clockwise
from the first baseline's reference axis), the physical inter-channel phases
are

    dphi01 = -(2 pi d / lambda) cos(theta) sin(psi)
    dphi12 = -(2 pi d / lambda) cos(theta) cos(psi)

and the inversion is

    psi   = atan2(-dphi01, -dphi12)
    theta = arccos( (lambda / (2 pi d)) sqrt(dphi01^2 + dphi12^2) )

For d = k lambda/2 with integer k > 1 the measured phases wrap, and a single
wrapped pair is consistent with up to k lobes per baseline. Enumeration walks
the feasible set of 2pi shifts (those keeping |phase| <= k pi), which for a
wrapped input contains exactly k integers except on the boundary where a
(k+1)-th sneaks in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidElevation
from .util import wrap_phase, wrap_two_pi

#: relative slack when testing the arccos argument against 1
ELEVATION_TOL = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    """L-array geometry: baseline spacing, wavelength, heading.

    Construction enforces the design constraint d = k lambda/2 with integer
    k >= 1; everything downstream relies on it.
    """

    spacing: float     # baseline length d [m]
    wavelength: float  # carrier wavelength [m]
    yaw: float = 0.0   # array heading clockwise from north [rad]

    def __post_init__(self):
        if self.spacing <= 0.0 or self.wavelength <= 0.0:
            raise ValueError("spacing and wavelength must be positive")
        ratio = 2.0 * self.spacing / self.wavelength
        k = round(ratio)
        if k < 1 or abs(ratio - k) > 1e-6:
            raise ValueError(
                f"spacing must be an integer multiple of lambda/2, got "
                f"2d/lambda = {ratio:.9g}"
            )

    @property
    def k(self) -> int:
        """Spacing in half-wavelengths (number of lobes per baseline)."""
        return round(2.0 * self.spacing / self.wavelength)

    @property
    def phase_scale(self) -> float:
        """2 pi d / lambda, the phase magnitude at cos(theta) = 1."""
        return 2.0 * math.pi * self.spacing / self.wavelength

    @classmethod
    def from_half_wavelengths(cls, k: int, wavelength: float,
                              yaw: float = 0.0) -> "ArrayGeometry":
        return cls(spacing=k * wavelength / 2.0, wavelength=wavelength, yaw=yaw)


@dataclass(frozen=True)
class AoATrack:
    """Per-sample angles for one grating-lobe hypothesis.

    `ambiguity` is the 1-based (i, j) lobe index pair. Samples where the
    hypothesis is geometrically infeasible carry NaN angles and valid=False.
    """

    times: np.ndarray      # (N,) [s]
    azimuth: np.ndarray    # (N,) [rad], NaN where invalid
    elevation: np.ndarray  # (N,) [rad], NaN where invalid
    valid: np.ndarray      # (N,) bool
    ambiguity: tuple[int, int]

    def __len__(self):
        return len(self.times)

    @property
    def valid_fraction(self) -> float:
        n = len(self.valid)
        return float(np.count_nonzero(self.valid)) / n if n else 0.0

    @property
    def max_elevation(self) -> float:
        if not self.valid.any():
            return float("nan")
        return float(np.nanmax(np.where(self.valid, self.elevation, np.nan)))

    @property
    def t_max_elevation(self) -> float:
        """Time of the elevation maximum over valid samples (exact argmax)."""
        el = np.where(self.valid, self.elevation, -np.inf)
        return float(self.times[int(np.argmax(el))])


def forward_phase(azimuth, elevation, array: ArrayGeometry):
    """Unwrapped inter-channel phases for angles seen from this array.

    Azimuth is north-referenced; the array heading is subtracted before the
    projection. Inputs broadcast; outputs are floats for scalar inputs.
    """
    az = np.asarray(azimuth, dtype=float) - array.yaw
    el = np.asarray(elevation, dtype=float)
    amp = -array.phase_scale * np.cos(el)
    dphi01 = amp * np.sin(az)
    dphi12 = amp * np.cos(az)
    if dphi01.ndim == 0:
        return float(dphi01), float(dphi12)
    return dphi01, dphi12


def aoa_from_phase(dphi01, dphi12, array: ArrayGeometry):
    """Invert (possibly unwrapped) phases to north-referenced (az, el).

    Raises InvalidElevation if any arccos argument exceeds 1 by more than
    ELEVATION_TOL; arguments inside the tolerance band clamp to 1. The
    degenerate zero-phase pair maps to azimuth = yaw (atan2(0, 0) taken as 0).
    """
    p01 = np.asarray(dphi01, dtype=float)
    p12 = np.asarray(dphi12, dtype=float)
    arg = np.hypot(p01, p12) / array.phase_scale
    if np.any(arg > 1.0 + ELEVATION_TOL):
        worst = float(np.max(arg))
        raise InvalidElevation(
            f"phase norm outside the feasible cone: arccos argument {worst:.9g}"
        )
    el = np.arccos(np.minimum(arg, 1.0))
    # +0.0 normalizes signed zeros so the degenerate pair maps to atan2(0, 0) = 0
    az = wrap_two_pi(np.arctan2(-p01 + 0.0, -p12 + 0.0) + array.yaw)
    if p01.ndim == 0:
        return float(az), float(el)
    return az, el


def _feasible_shifts(wrapped: float, k: int) -> np.ndarray:
    """Integer m with wrapped + 2 pi m inside [-k pi, k pi] (closed, eps slack)."""
    w = wrapped / (2.0 * math.pi)
    lo = math.ceil(-k / 2.0 - w - 1e-9)
    hi = math.floor(k / 2.0 - w + 1e-9)
    return np.arange(lo, hi + 1)


def enumerate_candidates(dphi01_wrapped: float, dphi12_wrapped: float,
                         array: ArrayGeometry) -> list[tuple[int, int, float, float]]:
    """All lobe hypotheses consistent with one wrapped phase pair.

    Returns (i, j, dphi01_i, dphi12_j) tuples with 1-based lobe indices,
    ordered by ascending shift (so (1, 1) is the most negative pair). The
    list has k entries per baseline, k^2 total, except when a wrapped value
    sits exactly on the lobe boundary and one extra shift is feasible.
    """
    for name, w in (("dphi01", dphi01_wrapped), ("dphi12", dphi12_wrapped)):
        if not (-math.pi - 1e-9 <= w <= math.pi + 1e-9):
            raise ValueError(f"{name} must be wrapped to (-pi, pi], got {w!r}")
    k = array.k
    shifts01 = _feasible_shifts(dphi01_wrapped, k)
    shifts12 = _feasible_shifts(dphi12_wrapped, k)
    out = []
    for i, m01 in enumerate(shifts01, start=1):
        phi01 = dphi01_wrapped + 2.0 * math.pi * m01
        for j, m12 in enumerate(shifts12, start=1):
            phi12 = dphi12_wrapped + 2.0 * math.pi * m12
            out.append((i, j, float(phi01), float(phi12)))
    return out


def _unwrap_rebased(wrapped: np.ndarray, valid: np.ndarray) -> tuple[np.ndarray, int]:
    """Temporally unwrap the valid samples, rebased so the reference sample
    (middle valid index) keeps its wrapped value. Returns (series, ref_index);
    entries at invalid samples are NaN."""
    idx = np.flatnonzero(valid)
    u = np.full(len(wrapped), np.nan)
    pos = len(idx) // 2
    ref = int(idx[pos])
    seq = np.unwrap(wrapped[idx])
    seq = seq - 2.0 * math.pi * round((seq[pos] - wrapped[ref]) / (2.0 * math.pi))
    u[idx] = seq
    return u, ref


def candidate_tracks(obs, array: ArrayGeometry) -> list[AoATrack]:
    """Expand wrapped phase observables into per-lobe angle tracks.

    `obs` is a PassObservables. The wrapped series are temporally unwrapped
    (so in-pass wrap crossings do not fragment a lobe), anchored at the middle
    valid sample, and shifted by every feasible 2pi pair. Each hypothesis is
    inverted per sample; samples that leave the feasible cone are marked
    invalid, and tracks with more than half their samples invalid are dropped.
    """
    valid = np.asarray(obs.valid, dtype=bool)
    valid = valid & np.isfinite(obs.dphi01) & np.isfinite(obs.dphi12)
    n_valid = int(np.count_nonzero(valid))
    if n_valid == 0:
        return []

    u01, ref = _unwrap_rebased(np.asarray(obs.dphi01, dtype=float), valid)
    u12, _ = _unwrap_rebased(np.asarray(obs.dphi12, dtype=float), valid)
    k = array.k
    shifts01 = _feasible_shifts(wrap_phase(u01[ref]), k)
    shifts12 = _feasible_shifts(wrap_phase(u12[ref]), k)

    two_pi = 2.0 * math.pi
    p01 = u01[None, :] + two_pi * shifts01[:, None]          # (n01, N)
    p12 = u12[None, :] + two_pi * shifts12[:, None]          # (n12, N)
    arg = np.hypot(p01[:, None, :], p12[None, :, :]) / array.phase_scale
    with np.errstate(invalid="ignore"):
        feasible = valid[None, None, :] & (arg <= 1.0 + ELEVATION_TOL)
        el = np.arccos(np.minimum(np.where(feasible, arg, 0.0), 1.0))
    az = wrap_two_pi(
        np.arctan2(-p01[:, None, :] + 0.0, -p12[None, :, :] + 0.0) + array.yaw
    )

    times = np.asarray(obs.times, dtype=float)
    tracks = []
    for i in range(len(shifts01)):
        for j in range(len(shifts12)):
            ok = feasible[i, j]
            n_ok = int(np.count_nonzero(ok))
            if n_ok * 2 < n_valid:
                continue
            tracks.append(AoATrack(
                times=times,
                azimuth=np.where(ok, az[i, j], np.nan),
                elevation=np.where(ok, el[i, j], np.nan),
                valid=ok,
                ambiguity=(i + 1, j + 1),
            ))
    return tracks
