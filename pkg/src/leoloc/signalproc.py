"""IQ capture synthesis and the STFT front end.

The beacon is modelled as a single complex tone riding the true Doppler
profile (plus a transmitter frequency offset). Three receive channels share
the tone; the inter-channel phases follow the array forward model, optionally
disturbed by slow phase noise and additive white noise.

Front-end chain: stft (14 ms window, 50% overlap) -> per-frame peak picking
against a relative power threshold -> wrapped phase differences and Doppler
per frame. Frames with no qualifying peak become explicit missing samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .aoa import ArrayGeometry, forward_phase
from .errors import InsufficientSamples, NoBeaconDetected
from .orbitsim import PassTruth, true_doppler
from .util import wrap_phase

DEFAULT_SAMPLE_RATE = 2.0e6   # [S/s]
DEFAULT_WINDOW = 0.014        # [s] STFT window; bin width = 1/window ~ 71.4 Hz
DEFAULT_OVERLAP = 0.5
DETECT_THRESHOLD = 10.0       # peak power vs mean bin power
MIN_DETECT_FRACTION = 0.2
CORR_HALF_WIDTH = 8           # bins each side of the peak for phase readout

_CHUNK = 1 << 20              # synthesis chunk length [samples]


@dataclass(frozen=True)
class NoiseSpec:
    """Impairments applied when synthesizing a capture.

    phase_std:   std of the slow inter-channel phase noise [rad]; applied
                 piecewise-constant per `snr_window` segment to channels 0/2.
    snr_db:      per-STFT-bin SNR of the tone (referred to a window of
                 `snr_window` seconds). None disables additive noise.
    """

    phase_std: float = 0.0
    snr_db: float | None = None
    snr_window: float = DEFAULT_WINDOW


@dataclass
class IqCapture:
    """Multi-channel complex baseband capture."""

    sample_rate: float
    fc: float
    t0: float
    channels: np.ndarray  # (n_channels, n_samples) complex64

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass
class Spectrogram:
    """STFT output: values[t, f], frame-centre times, fftshifted freqs."""

    times: np.ndarray   # (F,) [s]
    freqs: np.ndarray   # (B,) [Hz], ascending
    values: np.ndarray  # (F, B) complex


@dataclass
class PassObservables:
    """Per-frame front-end output on a uniform time grid.

    Missing frames keep their slot: valid=False and NaN data, so the time
    base never silently compresses.
    """

    times: np.ndarray    # (N,) [s]
    dphi01: np.ndarray   # (N,) [rad] in (-pi, pi]
    dphi12: np.ndarray   # (N,) [rad] in (-pi, pi]
    doppler: np.ndarray  # (N,) [Hz]
    snr: np.ndarray      # (N,) [dB]
    valid: np.ndarray = field(default=None)  # (N,) bool

    def __post_init__(self):
        n = len(self.times)
        if self.valid is None:
            self.valid = np.ones(n, dtype=bool)
        for name in ("dphi01", "dphi12", "doppler", "snr", "valid"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length does not match times")
        self.valid = np.asarray(self.valid, dtype=bool)

    def __len__(self):
        return len(self.times)

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))


def synthesize_capture(truth: PassTruth, array: ArrayGeometry, noise: NoiseSpec,
                       fc: float, doppler_offset: float = 0.0,
                       sample_rate: float = DEFAULT_SAMPLE_RATE,
                       rng: np.random.Generator | None = None,
                       duration: float | None = None) -> IqCapture:
    """Render the pass as a three-channel IQ capture.

    The tone's instantaneous frequency is the true Doppler plus
    `doppler_offset`; channel 1 is the phase reference, channels 0 and 2
    carry the forward-model phases (dphi01 = phi0 - phi1, dphi12 = phi1 -
    phi2) plus phase noise. `duration` trims the capture (from the start of
    the pass window); captures at full pass length get large, ~100 MB/s of
    channel data at the default rate.
    """
    if rng is None:
        rng = np.random.default_rng()
    t0 = float(truth.times[0])
    t_end = float(truth.times[-1]) if duration is None else t0 + duration
    n = int(math.floor((t_end - t0) * sample_rate)) + 1
    if n < 2:
        raise InsufficientSamples("capture would be shorter than two samples")

    f_inst = true_doppler(truth, fc) + doppler_offset
    dphi01_true, dphi12_true = forward_phase(truth.azimuth, truth.elevation, array)

    seg_len = noise.snr_window
    n_seg = int(math.floor((t_end - t0) / seg_len)) + 1
    if noise.phase_std > 0.0:
        pn0 = rng.normal(0.0, noise.phase_std, n_seg)
        pn2 = rng.normal(0.0, noise.phase_std, n_seg)
    else:
        pn0 = pn2 = np.zeros(n_seg)

    if noise.snr_db is None or math.isinf(noise.snr_db):
        sigma = 0.0
    else:
        n_win = int(round(noise.snr_window * sample_rate))
        sigma = math.sqrt(n_win / 10.0 ** (noise.snr_db / 10.0))

    out = np.empty((3, n), dtype=np.complex64)
    phase_carry = 0.0
    for a in range(0, n, _CHUNK):
        b = min(a + _CHUNK, n)
        t = t0 + np.arange(a, b) / sample_rate
        f = np.interp(t, truth.times, f_inst)
        dphi = 2.0 * math.pi * f / sample_rate
        phase = phase_carry + np.cumsum(dphi)
        phase_carry = phase[-1]
        d01 = np.interp(t, truth.times, dphi01_true)
        d12 = np.interp(t, truth.times, dphi12_true)
        seg = np.minimum(((t - t0) / seg_len).astype(int), n_seg - 1)
        ch1 = np.exp(1j * phase)
        out[0, a:b] = ch1 * np.exp(1j * (d01 + pn0[seg]))
        out[1, a:b] = ch1
        out[2, a:b] = ch1 * np.exp(1j * (-d12 + pn2[seg]))
        if sigma > 0.0:
            for c in range(3):
                out[c, a:b] += (sigma / math.sqrt(2.0)) * (
                    rng.standard_normal(b - a) + 1j * rng.standard_normal(b - a)
                ).astype(np.complex64)
    return IqCapture(sample_rate=sample_rate, fc=fc, t0=t0, channels=out)


def stft(samples: np.ndarray, sample_rate: float,
         window: float = DEFAULT_WINDOW, overlap: float = DEFAULT_OVERLAP,
         t0: float = 0.0) -> Spectrogram:
    """Short-time Fourier transform with a rectangular window.

    Parameters
    ----------
    samples : complex ndarray
    sample_rate : float
    window : float
        Window length [s]; the bin width is 1/window.
    overlap : float
        Fractional overlap between consecutive windows, in [0, 1).
    t0 : float
        Time of the first sample; frame times are window centres.
    """
    if not (0.0 <= overlap < 1.0):
        raise ValueError("overlap must be in [0, 1)")
    n_win = int(round(window * sample_rate))
    if n_win < 2 or len(samples) < n_win:
        raise InsufficientSamples(
            f"need at least one {n_win}-sample window, got {len(samples)}"
        )
    hop = max(int(round(n_win * (1.0 - overlap))), 1)
    frames = np.lib.stride_tricks.sliding_window_view(samples, n_win)[::hop]
    values = np.fft.fftshift(np.fft.fft(frames, axis=1), axes=1)
    freqs = np.fft.fftshift(np.fft.fftfreq(n_win, d=1.0 / sample_rate))
    starts = np.arange(frames.shape[0]) * hop
    times = t0 + (starts + (n_win - 1) / 2.0) / sample_rate
    return Spectrogram(times=times, freqs=freqs, values=values)


def detect_and_track(spec0: Spectrogram, spec1: Spectrogram, spec2: Spectrogram,
                     threshold: float = DETECT_THRESHOLD,
                     min_fraction: float = MIN_DETECT_FRACTION) -> PassObservables:
    """Track the beacon tone across frames and emit phase/Doppler observables.

    Per frame the three channels' bin powers are summed and the peak bin is
    kept if it exceeds `threshold` times the mean bin power. Qualifying
    frames yield the Doppler (peak bin frequency) and the wrapped phase
    differences dphi01 = arg(X0) - arg(X1), dphi12 = arg(X1) - arg(X2),
    each read out from the cross-channel correlation summed over the peak's
    bin neighbourhood (the common leakage kernel cancels there, which a
    single-bin readout only does to first order); other frames become
    missing samples.

    Raises
    ------
    NoBeaconDetected
        If fewer than `min_fraction` of the frames qualify.
    """
    shapes = {s.values.shape for s in (spec0, spec1, spec2)}
    if len(shapes) != 1:
        raise ValueError("channel spectrograms must share one shape")
    power = (np.abs(spec0.values) ** 2 + np.abs(spec1.values) ** 2
             + np.abs(spec2.values) ** 2).astype(float)
    mean_p = power.mean(axis=1)
    peak_bin = np.argmax(power, axis=1)
    rows = np.arange(power.shape[0])
    peak_p = power[rows, peak_bin]
    ok = peak_p > threshold * mean_p

    n = len(rows)
    n_ok = int(np.count_nonzero(ok))
    if n_ok < min_fraction * n:
        raise NoBeaconDetected(
            f"{n_ok}/{n} frames above threshold (need {min_fraction:.0%})"
        )

    doppler = np.where(ok, spec1.freqs[peak_bin], np.nan)
    cols = peak_bin[:, None] + np.arange(-CORR_HALF_WIDTH, CORR_HALF_WIDTH + 1)
    cols = np.clip(cols, 0, power.shape[1] - 1)
    c01 = (spec0.values[rows[:, None], cols]
           * np.conj(spec1.values[rows[:, None], cols])).sum(axis=1)
    c12 = (spec1.values[rows[:, None], cols]
           * np.conj(spec2.values[rows[:, None], cols])).sum(axis=1)
    dphi01 = np.where(ok, wrap_phase(np.angle(c01)), np.nan)
    dphi12 = np.where(ok, wrap_phase(np.angle(c12)), np.nan)
    with np.errstate(divide="ignore"):
        snr = np.where(
            ok, 10.0 * np.log10(np.maximum(peak_p / mean_p - 1.0, 1e-12)), np.nan
        )
    return PassObservables(times=spec1.times.copy(), dphi01=dphi01,
                           dphi12=dphi12, doppler=doppler, snr=snr, valid=ok)
