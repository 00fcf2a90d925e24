"""Spectral front end: framing, power spectra, log-mel filter banks, MFCCs, deltas.

Conventions are fixed to common Kaldi-style defaults: 25 ms Hamming frames with
a 10 ms shift, pre-emphasis 0.97, 512-point FFT, 40 mel filters between 20 Hz
and 7600 Hz, log floor 1e-10, and c0 kept in place of a log-energy channel.
No dithering is applied, so extraction is bit-reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .audio import AudioSignal
from .fmx import FeatureKind, FeatureMatrix


@dataclass(frozen=True)
class FrontEndConfig:
    frame_len_s: float = 0.025
    shift_s: float = 0.010
    preemph: float = 0.97
    nfft: int = 512
    n_mels: int = 40
    fmin_hz: float = 20.0
    fmax_hz: float = 7600.0
    log_floor: float = 1e-10
    n_ceps: int = 13
    delta_window: int = 2


DEFAULT_CONFIG = FrontEndConfig()


class SignalTooShortError(ValueError):
    pass


def _samples(signal) -> np.ndarray:
    if isinstance(signal, AudioSignal):
        return signal.samples
    return np.asarray(signal, dtype=np.float64)


def preemphasize(signal: AudioSignal, coeff: float = 0.97) -> AudioSignal:
    """First-order pre-emphasis ``y[t] = x[t] - coeff * x[t-1]``.

    The first sample uses itself as predecessor, Kaldi style.
    """
    if not 0.0 <= coeff < 1.0:
        raise ValueError(f"pre-emphasis coefficient must be in [0, 1), got {coeff}")
    x = _samples(signal)
    if len(x) == 0:
        return AudioSignal(x.copy())
    y = np.empty_like(x)
    y[0] = x[0] - coeff * x[0]
    y[1:] = x[1:] - coeff * x[:-1]
    return AudioSignal(y)


def hamming(length: int) -> np.ndarray:
    if length == 1:
        return np.ones(1)
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))


def frame_lengths(sample_rate: int, frame_len_s: float, shift_s: float) -> tuple[int, int]:
    return int(round(frame_len_s * sample_rate)), int(round(shift_s * sample_rate))


def num_frames(n_samples: int, frame_len: int, shift: int) -> int:
    if n_samples < frame_len:
        return 0
    return 1 + (n_samples - frame_len) // shift


def frame_signal(signal: AudioSignal, frame_len_s: float = 0.025, shift_s: float = 0.010,
                 window: bool = True) -> np.ndarray:
    """Slice a signal into overlapping frames, Hamming-windowed by default.

    Returns an array of shape ``(n_frames, frame_len)`` with
    ``n_frames = 1 + (N - L) // S``.
    """
    x = _samples(signal)
    sr = signal.sample_rate_hz if isinstance(signal, AudioSignal) else 16000
    L, S = frame_lengths(sr, frame_len_s, shift_s)
    if len(x) < L:
        raise SignalTooShortError(
            f"signal too short: {len(x)} samples, need at least {L} for one frame"
        )
    n = num_frames(len(x), L, S)
    idx = np.arange(L)[None, :] + S * np.arange(n)[:, None]
    frames = x[idx]
    if window:
        frames = frames * hamming(L)
    return frames


def power_spectrum(frame: np.ndarray, nfft: int = 512) -> np.ndarray:
    """|DFT|^2 of the zero-padded frame(s), bins ``0 .. nfft/2``.

    Accepts one frame or a 2-D stack of frames (one per row).
    """
    frame = np.asarray(frame, dtype=np.float64)
    if nfft <= 0 or nfft & (nfft - 1):
        raise ValueError(f"nfft must be a power of two, got {nfft}")
    if frame.shape[-1] > nfft:
        raise ValueError(f"nfft={nfft} is shorter than the frame length {frame.shape[-1]}")
    spec = np.fft.rfft(frame, n=nfft, axis=-1)
    return spec.real**2 + spec.imag**2


def hz_to_mel(f):
    return 1127.0 * np.log1p(np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * np.expm1(np.asarray(m, dtype=np.float64) / 1127.0)


def mel_center_frequencies(n_mels: int = 40, fmin_hz: float = 20.0,
                           fmax_hz: float = 7600.0) -> np.ndarray:
    edges = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2)
    return mel_to_hz(edges[1:-1])


def mel_filterbank_matrix(nfft: int, n_mels: int = 40, sr: int = 16000,
                          fmin_hz: float = 20.0, fmax_hz: float = 7600.0) -> np.ndarray:
    """Triangular mel filters over rfft bins, shape ``(n_mels, nfft//2 + 1)``.

    Triangles are linear in the mel domain, edges equally spaced on
    ``1127 ln(1 + f/700)`` between ``fmin_hz`` and ``fmax_hz``.
    """
    if not 0.0 <= fmin_hz < fmax_hz <= sr / 2.0:
        raise ValueError(f"invalid band edges fmin={fmin_hz}, fmax={fmax_hz} for sr={sr}")
    if n_mels < 1:
        raise ValueError("n_mels must be positive")
    edges = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2)
    bin_mel = hz_to_mel(np.arange(nfft // 2 + 1) * sr / nfft)
    left, center, right = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (bin_mel - left) / (center - left)
    down = (right - bin_mel) / (right - center)
    fb = np.maximum(0.0, np.minimum(up, down))
    empty = np.flatnonzero(fb.max(axis=1) <= 0.0)
    if empty.size:
        raise ValueError(
            f"mel filter(s) {empty.tolist()} contain no FFT bin; use fewer mels or larger nfft"
        )
    return fb


_FB_CACHE: dict = {}


def _filterbank(cfg: FrontEndConfig, sr: int) -> np.ndarray:
    key = (cfg.nfft, cfg.n_mels, sr, cfg.fmin_hz, cfg.fmax_hz)
    if key not in _FB_CACHE:
        _FB_CACHE[key] = mel_filterbank_matrix(*key)
    return _FB_CACHE[key]


def mel_energies(signal: AudioSignal, cfg: FrontEndConfig = DEFAULT_CONFIG) -> np.ndarray:
    emph = preemphasize(signal, cfg.preemph)
    frames = frame_signal(emph, cfg.frame_len_s, cfg.shift_s)
    spec = power_spectrum(frames, cfg.nfft)
    return spec @ _filterbank(cfg, signal.sample_rate_hz).T


def log_mel_fb(signal: AudioSignal, cfg: FrontEndConfig = DEFAULT_CONFIG) -> FeatureMatrix:
    logmel = np.log(mel_energies(signal, cfg) + cfg.log_floor)
    return FeatureMatrix(logmel, FeatureKind.FB40, cfg.shift_s)


def dct_ortho(x: np.ndarray, n_keep: int | None = None) -> np.ndarray:
    """Orthonormal DCT-II along the last axis, truncated to ``n_keep`` coefficients."""
    c = scipy.fft.dct(np.asarray(x, dtype=np.float64), type=2, norm="ortho", axis=-1)
    return c if n_keep is None else c[..., :n_keep]


def mfcc(signal: AudioSignal, cfg: FrontEndConfig = DEFAULT_CONFIG) -> FeatureMatrix:
    fb = log_mel_fb(signal, cfg)
    return FeatureMatrix(dct_ortho(fb.values, cfg.n_ceps), FeatureKind.MFCC13, cfg.shift_s)


def _delta(x: np.ndarray, window: int) -> np.ndarray:
    T = x.shape[0]
    padded = np.concatenate([np.repeat(x[:1], window, axis=0), x,
                             np.repeat(x[-1:], window, axis=0)])
    out = np.zeros_like(x, dtype=np.float64)
    for n in range(1, window + 1):
        out += n * (padded[window + n:window + n + T] - padded[window - n:window - n + T])
    return out / (2.0 * sum(n * n for n in range(1, window + 1)))


def add_deltas(features, window: int = 2) -> FeatureMatrix:
    """Append regression deltas and delta-deltas; edge frames are replicated."""
    if isinstance(features, FeatureMatrix):
        x, kind, shift = features.values, features.feature_kind, features.frame_shift_s
    else:
        x, kind, shift = np.asarray(features), FeatureKind.MFCC13, DEFAULT_CONFIG.shift_s
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("add_deltas needs at least one frame")
    if window < 1:
        raise ValueError("delta window must be >= 1")
    d1 = _delta(x, window)
    d2 = _delta(d1, window)
    if kind == FeatureKind.MFCC13:
        kind = FeatureKind.MFCC39
    return FeatureMatrix(np.hstack([x, d1, d2]), kind, shift)


def mfcc39(signal: AudioSignal, cfg: FrontEndConfig = DEFAULT_CONFIG) -> FeatureMatrix:
    return add_deltas(mfcc(signal, cfg), cfg.delta_window)
