"""Doppler-shift-and-rate disambiguation across grating-lobe candidates.

The measured Doppler curve is invariant to the transmitter's frequency
offset only up to a constant, so candidates are compared on the Doppler
*rate*: both the measurement and each candidate's predicted Doppler get a
degree-3 polynomial fit, and the loss sums squared rate differences over the
measured timestamps. Two physical filters run first: candidates whose
elevation never clears the mask, and candidates whose elevation peaks far
from where the measured rate says the pass culminated, are discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aoa import AoATrack
from .errors import InsufficientSamples, NoSurvivingCandidate
from .geodesy import EARTH, SPEED_OF_LIGHT, EarthModel, slant_range_from_height
from .ranging import fitted_los

MIN_FIT_SAMPLES = 8
MIN_FIT_SPAN = 0.3           # fraction of the observation window
DEFAULT_MIN_ELEVATION = math.radians(30.0)
TIMING_THRESHOLD = 2.0       # [s]
TIMING_THRESHOLD_CLAMPED = 4.0


@dataclass
class DopplerFit:
    """Degree-3 fit of a Doppler curve and its derived culmination time.

    `coeffs` are power-series coefficients (ascending) in tau = t - t_ref.
    `rate_coeffs` is the exact analytic derivative. `t_maxel` is the argmin
    of the rate inside the window: the vertex of the rate parabola when it
    is interior and opens upward, otherwise the lower-rate endpoint (then
    `clamped` is set and timing filters widen).
    """

    t_ref: float
    coeffs: np.ndarray       # (4,)
    rate_coeffs: np.ndarray  # (3,)
    t_maxel: float
    window: tuple[float, float]
    clamped: bool

    def doppler(self, t):
        return np.polynomial.polynomial.polyval(
            np.asarray(t, dtype=float) - self.t_ref, self.coeffs)

    def rate(self, t):
        return np.polynomial.polynomial.polyval(
            np.asarray(t, dtype=float) - self.t_ref, self.rate_coeffs)


@dataclass
class CandidateScore:
    """Filter flags and rate-matching loss for one ambiguity candidate."""

    ambiguity: tuple[int, int]
    loss: float                  # [Hz^2/s^2 summed]; inf if not scored
    passed_elevation: bool
    passed_timing: bool

    @property
    def survived(self) -> bool:
        return self.passed_elevation and self.passed_timing


def fit_doppler(times, doppler, valid=None,
                min_samples: int = MIN_FIT_SAMPLES,
                min_span: float = MIN_FIT_SPAN) -> DopplerFit:
    """Fit a degree-3 polynomial to a (possibly gappy) Doppler series.

    Parameters
    ----------
    times, doppler : array-like
        Sample times [s] and Doppler [Hz]; NaNs count as missing.
    valid : bool array, optional
        Extra mask on top of finiteness.

    Raises
    ------
    InsufficientSamples
        Fewer than `min_samples` valid points, or their span covers less
        than `min_span` of the observation window.
    """
    t = np.asarray(times, dtype=float)
    f = np.asarray(doppler, dtype=float)
    ok = np.isfinite(f) & np.isfinite(t)
    if valid is not None:
        ok &= np.asarray(valid, dtype=bool)
    n = int(np.count_nonzero(ok))
    if n < min_samples:
        raise InsufficientSamples(f"{n} valid Doppler samples < {min_samples}")
    window = (float(t.min()), float(t.max()))
    span = float(t[ok].max() - t[ok].min())
    full = window[1] - window[0]
    if full > 0.0 and span < min_span * full:
        raise InsufficientSamples(
            f"valid samples span {span:.3g} s of a {full:.3g} s window"
        )

    t_ref = 0.5 * (window[0] + window[1])
    tau = t[ok] - t_ref
    coeffs = np.polynomial.polynomial.polyfit(tau, f[ok], 3)
    rate_coeffs = coeffs[1:] * np.array([1.0, 2.0, 3.0])

    # rate = c1 + 2 c2 tau + 3 c3 tau^2; interior minimum needs c3 > 0
    lo, hi = window[0] - t_ref, window[1] - t_ref
    c3 = coeffs[3]
    vertex = -coeffs[2] / (3.0 * c3) if c3 != 0.0 else math.inf
    if c3 > 0.0 and lo <= vertex <= hi:
        t_maxel = t_ref + vertex
        clamped = False
    else:
        rate_ends = np.polynomial.polynomial.polyval(
            np.array([lo, hi]), rate_coeffs)
        t_maxel = t_ref + (lo if rate_ends[0] <= rate_ends[1] else hi)
        clamped = True
    return DopplerFit(t_ref=t_ref, coeffs=coeffs, rate_coeffs=rate_coeffs,
                      t_maxel=float(t_maxel), window=window, clamped=clamped)


def culmination_time(track: AoATrack) -> float:
    """Candidate culmination from the smoothed elevation profile.

    The raw per-sample argmax (AoATrack.t_max_elevation) wanders by seconds
    under phase noise when the elevation peak is flat; the polynomial-fit
    profile keeps the estimate usable at matching noise. Identical to the
    raw argmax on clean data.
    """
    t, el, _, _ = fitted_los(track)
    return float(t[int(np.argmax(el))])


def candidate_doppler(track: AoATrack, height: float, fc: float,
                      earth: EarthModel = EARTH) -> np.ndarray:
    """Predicted Doppler [Hz] for a candidate track at a candidate height.

    Slant range from the smoothed elevation profile at `height`, central
    differences for the range rate, scaled by -fc/c. Aligned with
    track.times; NaN where the derivative is unavailable.
    """
    t, el, _, idx = fitted_los(track)
    r = slant_range_from_height(el, height, earth)
    rdot = (r[2:] - r[:-2]) / (t[2:] - t[:-2])
    out = np.full(len(track), np.nan)
    out[idx[1:-1]] = -(fc / SPEED_OF_LIGHT) * rdot
    return out


def select_candidate(candidates: Sequence[tuple[AoATrack, float]],
                     measured_fit: DopplerFit, fc: float,
                     min_elevation: float = DEFAULT_MIN_ELEVATION,
                     timing_threshold: float = TIMING_THRESHOLD,
                     clamped_timing_threshold: float = TIMING_THRESHOLD_CLAMPED,
                     earth: EarthModel = EARTH,
                     eval_times: np.ndarray | None = None,
                     ) -> tuple[int, list[CandidateScore]]:
    """Pick the ambiguity candidate whose Doppler rate matches the measurement.

    Parameters
    ----------
    candidates : sequence of (AoATrack, height) pairs
    measured_fit : DopplerFit
        Fit of the measured Doppler; its t_maxel anchors the timing filter
        (threshold widens when the fit's vertex was clamped).
    fc : float
        Carrier frequency [Hz].
    eval_times : ndarray, optional
        Timestamps where rate differences are summed — normally the
        measured (non-missing) sample grid, so every candidate is scored
        over the same terms; defaults to each candidate's own valid sample
        times when not given.

    Returns
    -------
    (winner_index, scores)
        Winner indexes into `candidates`; ties break to the smaller (i, j).

    Raises
    ------
    NoSurvivingCandidate
        If every candidate fails a filter or cannot be scored.
    """
    threshold = (clamped_timing_threshold if measured_fit.clamped
                 else timing_threshold)
    scores: list[CandidateScore] = []
    for track, height in candidates:
        ok_el = (track.valid.any()
                 and track.max_elevation >= min_elevation)
        ok_t = False
        if track.valid.any():
            try:
                t_cand = culmination_time(track)
                ok_t = abs(t_cand - measured_fit.t_maxel) <= threshold
            except InsufficientSamples:
                ok_t = False
        loss = math.inf
        if ok_el and ok_t:
            try:
                pred = candidate_doppler(track, height, fc, earth)
                cand_fit = fit_doppler(track.times, pred)
                if eval_times is None:
                    t_eval = track.times[track.valid & np.isfinite(pred)]
                else:
                    t_eval = np.asarray(eval_times, dtype=float)
                diff = cand_fit.rate(t_eval) - measured_fit.rate(t_eval)
                loss = float(np.sum(diff * diff))
            except InsufficientSamples:
                loss = math.inf
        scores.append(CandidateScore(ambiguity=track.ambiguity, loss=loss,
                                     passed_elevation=bool(ok_el),
                                     passed_timing=bool(ok_t)))

    best = None
    for i, s in enumerate(scores):
        if not (s.survived and math.isfinite(s.loss)):
            continue
        if best is None:
            best = i
            continue
        b = scores[best]
        if (s.loss, s.ambiguity) < (b.loss, b.ambiguity):
            best = i
    if best is None:
        n_el = sum(not s.passed_elevation for s in scores)
        n_t = sum(not s.passed_timing for s in scores)
        raise NoSurvivingCandidate(
            f"all {len(scores)} candidates rejected "
            f"(elevation filter: {n_el}, timing filter: {n_t})"
        )
    return best, scores
