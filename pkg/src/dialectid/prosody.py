"""Prosodic low-level descriptors and utterance functionals.

A compact stand-in for the eGeMAPS family: autocorrelation f0 with voicing,
frame energy, and spectral tilt, plus 23 utterance-level functionals.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioSignal
from .dsp import frame_signal, power_spectrum
from .fmx import FeatureKind, FeatureMatrix

F0_MIN_HZ = 60.0
F0_MAX_HZ = 400.0
VOICING_THRESHOLD = 0.45
SILENCE_DB = -70.0
# nearest local ACF peak within this fraction of the global peak wins (octave guard)
OCTAVE_RATIO = 0.9
ENERGY_FLOOR = 1e-12
TILT_BAND_HZ = (100.0, 5000.0)
FRAME_LEN_S = 0.025
SHIFT_S = 0.010

_LLD_STATS = ("mean", "std", "p20", "p50", "p80", "rise_slope", "fall_slope")
FUNCTIONAL_NAMES = tuple(
    f"{lld}_{stat}" for lld in ("logf0", "energy_db", "tilt") for stat in _LLD_STATS
) + ("voiced_fraction", "duration_s")


@dataclass
class ProsodicContour:
    f0_hz: np.ndarray
    voiced: np.ndarray
    energy_db: np.ndarray
    tilt: np.ndarray

    def __len__(self):
        return len(self.f0_hz)


def _normalized_acf(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation r[t, lag] for lags 0..max_lag.

    r(k) = sum x[n]x[n+k] / sqrt(sum_{n<L-k} x[n]^2 * sum_{n>=k} x[n]^2)
    """
    L = frames.shape[1]
    nfft = 1 << int(np.ceil(np.log2(2 * L)))
    spec = np.fft.rfft(frames, n=nfft, axis=1)
    cross = np.fft.irfft(spec.real**2 + spec.imag**2, n=nfft, axis=1)[:, : max_lag + 1]
    sq = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(frames**2, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    head = sq[:, L - lags]           # energy of x[0 : L-k]
    tail = sq[:, L:L + 1] - sq[:, lags]  # energy of x[k : L]
    denom = np.sqrt(head * tail)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, cross / np.where(denom > 0, denom, 1.0), 0.0)
    return r


def f0_contour(signal: AudioSignal, fmin: float = F0_MIN_HZ, fmax: float = F0_MAX_HZ,
               voicing_threshold: float = VOICING_THRESHOLD,
               silence_db: float = SILENCE_DB) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame f0 (Hz, 0 when unvoiced) and voicing flags."""
    if fmin >= fmax:
        raise ValueError(f"fmin ({fmin}) must be below fmax ({fmax})")
    sr = signal.sample_rate_hz
    frames = frame_signal(signal, FRAME_LEN_S, SHIFT_S, window=False)
    lag_lo = int(np.ceil(sr / fmax))
    lag_hi = int(np.floor(sr / fmin))
    r = _normalized_acf(frames, min(lag_hi + 1, frames.shape[1] - 1))
    rms_db = 10.0 * np.log10(np.mean(frames**2, axis=1) + ENERGY_FLOOR)

    n = frames.shape[0]
    f0 = np.zeros(n)
    voiced = np.zeros(n, dtype=bool)
    top = r.shape[1] - 1
    for t in range(n):
        if rms_db[t] <= silence_db:
            continue
        seg = r[t, lag_lo:lag_hi + 1]
        peak = seg.max()
        if not peak > voicing_threshold:
            continue
        lag = None
        for k in range(lag_lo, lag_hi + 1):
            v = r[t, k]
            if v < OCTAVE_RATIO * peak:
                continue
            if v >= r[t, k - 1] and (k >= top or v >= r[t, k + 1]):
                lag = k
                break
        if lag is None:
            lag = lag_lo + int(np.argmax(seg))
        shift = 0.0
        if 0 < lag < top:
            a, b, c = r[t, lag - 1], r[t, lag], r[t, lag + 1]
            curv = a - 2.0 * b + c
            if curv < 0:
                shift = 0.5 * (a - c) / curv
        f0[t] = np.clip(sr / (lag + shift), fmin, fmax)
        voiced[t] = True
    return f0, voiced


def energy_contour(signal: AudioSignal) -> np.ndarray:
    frames = frame_signal(signal, FRAME_LEN_S, SHIFT_S, window=False)
    return 10.0 * np.log10(np.mean(frames**2, axis=1) + ENERGY_FLOOR)


def spectral_tilt(signal: AudioSignal, band_hz=TILT_BAND_HZ, nfft: int = 512) -> np.ndarray:
    """Least-squares slope of log10 power against log10 frequency, per frame."""
    sr = signal.sample_rate_hz
    frames = frame_signal(signal, FRAME_LEN_S, SHIFT_S, window=True)
    spec = power_spectrum(frames, nfft)
    freqs = np.arange(spec.shape[1]) * sr / nfft
    sel = (freqs >= band_hz[0]) & (freqs <= band_hz[1])
    x = np.log10(freqs[sel])
    y = np.log10(spec[:, sel] + ENERGY_FLOOR)
    xc = x - x.mean()
    return (y - y.mean(axis=1, keepdims=True)) @ xc / (xc @ xc)


def prosodic_contour(signal: AudioSignal) -> ProsodicContour:
    f0, voiced = f0_contour(signal)
    return ProsodicContour(f0, voiced, energy_contour(signal), spectral_tilt(signal))


def prosodic_lld(signal: AudioSignal) -> FeatureMatrix:
    """Frame-level matrix with columns [log f0 (0 if unvoiced), voiced, energy dB, tilt]."""
    c = prosodic_contour(signal)
    logf0 = np.where(c.voiced, np.log(np.where(c.voiced, c.f0_hz, 1.0)), 0.0)
    values = np.column_stack([logf0, c.voiced.astype(np.float64), c.energy_db, c.tilt])
    return FeatureMatrix(values, FeatureKind.PROSODY, SHIFT_S)


def _voiced_runs(voiced: np.ndarray, min_len: int = 3) -> list[slice]:
    runs, start = [], None
    for t, v in enumerate(list(voiced) + [False]):
        if v and start is None:
            start = t
        elif not v and start is not None:
            if t - start >= min_len:
                runs.append(slice(start, t))
            start = None
    return runs


def _lld_stats(values: np.ndarray, full: np.ndarray, runs, shift_s: float) -> list[float]:
    if values.size == 0:
        return [0.0] * len(_LLD_STATS)
    p20, p50, p80 = np.percentile(values, [20, 50, 80])
    diffs = np.concatenate([np.diff(full[r]) for r in runs]) if runs else np.zeros(0)
    rises, falls = diffs[diffs > 0], diffs[diffs < 0]
    rise = rises.mean() / shift_s if rises.size else 0.0
    fall = -falls.mean() / shift_s if falls.size else 0.0
    return [values.mean(), values.std(), p20, p50, p80, rise, fall]


def functionals(contour: ProsodicContour, duration_s: float,
                shift_s: float = SHIFT_S) -> np.ndarray:
    """23 utterance functionals in the order of ``FUNCTIONAL_NAMES``.

    f0 statistics use log-Hz over voiced frames only; energy and tilt use all
    frames. Rise/fall slopes are averaged first differences (units per second,
    fall reported as a positive magnitude) inside voiced runs of >= 3 frames.
    """
    if len(contour) < 1:
        raise ValueError("functionals need at least one frame")
    voiced = np.asarray(contour.voiced, dtype=bool)
    runs = _voiced_runs(voiced)
    logf0 = np.where(voiced, np.log(np.where(voiced, contour.f0_hz, 1.0)), 0.0)
    out = _lld_stats(logf0[voiced], logf0, runs, shift_s)
    out += _lld_stats(np.asarray(contour.energy_db, float), contour.energy_db, runs, shift_s)
    out += _lld_stats(np.asarray(contour.tilt, float), contour.tilt, runs, shift_s)
    out += [float(voiced.mean()), float(duration_s)]
    return np.asarray(out, dtype=np.float64)
