"""End-to-end localization: calibrate, expand lobes, range, disambiguate.

`localize` strings the pieces together for one pass of observables and
returns the winning trajectory with enough diagnostics to see why the other
candidates lost. `synthesize_observables` is its observable-level test bench:
it produces the same record a front end would, but from geometric truth plus
configurable impairments, which is what the Monte Carlo harness feeds on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .aoa import AoATrack, ArrayGeometry, candidate_tracks, forward_phase
from .dsar import (CandidateScore, DopplerFit, culmination_time, fit_doppler,
                   select_candidate, TIMING_THRESHOLD, TIMING_THRESHOLD_CLAMPED)
from .errors import (FlatObjective, InsufficientOverlap, InsufficientSamples,
                     NoSurvivingCandidate)
from .geodesy import (EARTH, SPEED_OF_LIGHT, EarthModel, GeodeticPosition,
                      geodetic_to_ecef)
from .orbitsim import PassTruth, true_doppler
from .ranging import (DEFAULT_HEIGHT_GRID, HeightGrid, estimate_height,
                      track_to_ecef)
from .signalproc import PassObservables
from .util import circular_mean, wrap_phase

MIN_CALIBRATION_SAMPLES = 16


@dataclass(frozen=True)
class GroundStation:
    """Receiver site: geodetic position plus the mounted array."""

    position: GeodeticPosition
    array: ArrayGeometry

    @property
    def yaw(self) -> float:
        return self.array.yaw

    def ecef(self, earth: EarthModel = EARTH):
        return geodetic_to_ecef(self.position, earth)


@dataclass(frozen=True)
class CalibrationOffsets:
    """Constant per-baseline phase biases, wrapped to (-pi, pi]."""

    dphi01_offset: float
    dphi12_offset: float
    estimated_from: str = ""

    @classmethod
    def zero(cls) -> "CalibrationOffsets":
        return cls(0.0, 0.0, estimated_from="none")


@dataclass
class LocalizeConfig:
    """Knobs for `localize`; the defaults are the operating point."""

    min_elevation: float = math.radians(30.0)
    timing_threshold: float = TIMING_THRESHOLD
    clamped_timing_threshold: float = TIMING_THRESHOLD_CLAMPED
    height_grid: HeightGrid = field(default_factory=lambda: DEFAULT_HEIGHT_GRID)
    theta0: float = 0.0  # Earth rotation angle at t = 0 [rad]


@dataclass
class LocalizeDiagnostics:
    """Where the candidate population went."""

    n_candidates: int
    n_after_elevation: int
    n_after_timing: int
    n_ranged: int
    scores: list[CandidateScore]
    heights: dict[tuple[int, int], float]
    measured_fit: DopplerFit


@dataclass
class LocalizationResult:
    """Winning hypothesis for one pass."""

    winner: tuple[int, int]
    times: np.ndarray       # (N,) [s]
    azimuth: np.ndarray     # (N,) [rad], NaN at invalid samples
    elevation: np.ndarray   # (N,) [rad]
    valid: np.ndarray       # (N,) bool
    h_star: float           # [m]
    residual: float         # Newtonian residual at h_star
    r_track: np.ndarray     # (N,) [m], NaN at invalid samples
    trajectory: np.ndarray  # (n_valid, 3) ECEF [m]
    diagnostics: LocalizeDiagnostics


def calibrate(known_truth: PassTruth, obs: PassObservables,
              gs: GroundStation) -> CalibrationOffsets:
    """Estimate phase offsets from a pass with known geometry.

    The offset per baseline is the circular mean of (measured - modeled)
    wrapped differences over jointly valid samples, so biases near +-pi do
    not smear across the wrap seam.

    Raises InsufficientOverlap when truth and observables share fewer than
    MIN_CALIBRATION_SAMPLES aligned valid samples.
    """
    # align on timestamps; grids come from the same clock, so exact-ish
    # matching with a small tolerance is enough
    ti = np.round(np.asarray(known_truth.times) * 1e9).astype(np.int64)
    to = np.round(np.asarray(obs.times) * 1e9).astype(np.int64)
    common, ia, ib = np.intersect1d(ti, to, return_indices=True)
    if len(common) == 0:
        raise InsufficientOverlap("truth and observables share no timestamps")
    ok = obs.valid[ib]
    ia, ib = ia[ok], ib[ok]
    if len(ia) < MIN_CALIBRATION_SAMPLES:
        raise InsufficientOverlap(
            f"{len(ia)} aligned valid samples < {MIN_CALIBRATION_SAMPLES}"
        )
    m01, m12 = forward_phase(known_truth.azimuth[ia],
                             known_truth.elevation[ia], gs.array)
    d01 = wrap_phase(obs.dphi01[ib] - wrap_phase(m01))
    d12 = wrap_phase(obs.dphi12[ib] - wrap_phase(m12))
    return CalibrationOffsets(
        dphi01_offset=float(circular_mean(d01)),
        dphi12_offset=float(circular_mean(d12)),
        estimated_from=f"{len(ia)} samples",
    )


def apply_calibration(obs: PassObservables,
                      cal: CalibrationOffsets) -> PassObservables:
    """Subtract the offsets and re-wrap; everything else passes through."""
    return PassObservables(
        times=obs.times,
        dphi01=wrap_phase(obs.dphi01 - cal.dphi01_offset),
        dphi12=wrap_phase(obs.dphi12 - cal.dphi12_offset),
        doppler=obs.doppler,
        snr=obs.snr,
        valid=obs.valid.copy(),
    )


def localize(obs: PassObservables, gs: GroundStation,
             cal: CalibrationOffsets | None = None,
             cfg: LocalizeConfig | None = None) -> LocalizationResult:
    """Run the full chain on one pass of observables.

    Offsets are removed, every grating-lobe hypothesis is expanded into an
    angle track, tracks failing the elevation mask or the culmination-time
    gate are dropped, the survivors get a Newtonian height each, and the
    Doppler-rate match picks the winner. Per-candidate ranging failures only
    remove that candidate; an empty survivor set raises.

    Raises
    ------
    InsufficientSamples
        Not enough valid Doppler samples to fit the measured curve.
    NoSurvivingCandidate
        Every hypothesis was filtered or failed ranging.
    """
    if cal is None:
        cal = CalibrationOffsets.zero()
    if cfg is None:
        cfg = LocalizeConfig()
    obs = apply_calibration(obs, cal)
    fc = SPEED_OF_LIGHT / gs.array.wavelength

    measured_fit = fit_doppler(obs.times, obs.doppler, obs.valid)
    threshold = (cfg.clamped_timing_threshold if measured_fit.clamped
                 else cfg.timing_threshold)

    tracks = candidate_tracks(obs, gs.array)
    n_cand = len(tracks)
    kept_el = [t for t in tracks
               if t.valid.any() and t.max_elevation >= cfg.min_elevation]
    kept = []
    for t in kept_el:
        try:
            if abs(culmination_time(t) - measured_fit.t_maxel) <= threshold:
                kept.append(t)
        except InsufficientSamples:
            pass

    pairs: list[tuple[AoATrack, float]] = []
    heights: dict[tuple[int, int], float] = {}
    for t in kept:
        try:
            est = estimate_height(t, gs.position, cfg.height_grid,
                                  theta0=cfg.theta0)
        except (FlatObjective, InsufficientSamples):
            continue
        pairs.append((t, est.height))
        heights[t.ambiguity] = est.height
    if not pairs:
        raise NoSurvivingCandidate(
            f"of {n_cand} candidates, {len(kept_el)} passed the elevation "
            f"mask, {len(kept)} the timing gate, 0 survived ranging"
        )

    measured_grid = obs.times[obs.valid & np.isfinite(obs.doppler)]
    win, scores = select_candidate(
        pairs, measured_fit, fc,
        min_elevation=cfg.min_elevation,
        timing_threshold=cfg.timing_threshold,
        clamped_timing_threshold=cfg.clamped_timing_threshold,
        eval_times=measured_grid,
    )
    track, h_star = pairs[win]
    est = estimate_height(track, gs.position, cfg.height_grid,
                          theta0=cfg.theta0)
    traj_full = track_to_ecef(track, gs.position, h_star)
    trajectory = traj_full[track.valid]

    return LocalizationResult(
        winner=track.ambiguity,
        times=track.times,
        azimuth=track.azimuth,
        elevation=track.elevation,
        valid=track.valid,
        h_star=h_star,
        residual=est.residual,
        r_track=est.r_track,
        trajectory=trajectory,
        diagnostics=LocalizeDiagnostics(
            n_candidates=n_cand,
            n_after_elevation=len(kept_el),
            n_after_timing=len(kept),
            n_ranged=len(pairs),
            scores=scores,
            heights=heights,
            measured_fit=measured_fit,
        ),
    )


def angle_error_3d(az_est, el_est, az_true, el_true):
    """Great-circle angle [deg] between estimated and true pointing vectors.

    Collapses azimuth error by cos(elevation) near zenith, which is the
    honest measure of pointing error when azimuth itself degenerates.
    """
    az_e = np.asarray(az_est, dtype=float)
    el_e = np.asarray(el_est, dtype=float)
    az_t = np.asarray(az_true, dtype=float)
    el_t = np.asarray(el_true, dtype=float)
    dot = (np.cos(el_e) * np.cos(el_t) * np.cos(az_e - az_t)
           + np.sin(el_e) * np.sin(el_t))
    ang = np.degrees(np.arccos(np.clip(dot, -1.0, 1.0)))
    return float(ang) if ang.ndim == 0 else ang


def synthesize_observables(truth: PassTruth, gs: GroundStation, *,
                           phase_std: float = 0.0,
                           doppler_std: float = 0.0,
                           phase_offsets: tuple[float, float] = (0.0, 0.0),
                           doppler_offset: float = 0.0,
                           snr_db: float = 30.0,
                           rng: np.random.Generator | None = None,
                           ) -> PassObservables:
    """Observable-level twin of the RF front end.

    Phases come from the forward model plus constant offsets plus white
    Gaussian noise of `phase_std` per baseline; Doppler gets its own offset
    (transmitter CFO) and noise. No IQ synthesis, so it is fast enough for
    Monte Carlo ensembles.
    """
    if rng is None:
        rng = np.random.default_rng()
    n = len(truth.times)
    d01, d12 = forward_phase(truth.azimuth, truth.elevation, gs.array)
    fc = SPEED_OF_LIGHT / gs.array.wavelength
    fd = true_doppler(truth, fc) + doppler_offset
    if phase_std > 0.0:
        d01 = d01 + rng.normal(0.0, phase_std, n)
        d12 = d12 + rng.normal(0.0, phase_std, n)
    if doppler_std > 0.0:
        fd = fd + rng.normal(0.0, doppler_std, n)
    return PassObservables(
        times=truth.times.copy(),
        dphi01=wrap_phase(d01 + phase_offsets[0]),
        dphi12=wrap_phase(d12 + phase_offsets[1]),
        doppler=fd,
        snr=np.full(n, float(snr_db)),
    )
