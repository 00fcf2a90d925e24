"""Audio signal carrier and 16-bit PCM WAV I/O."""
from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

SAMPLE_RATE = 16000


class AudioFormatError(ValueError):
    pass


@dataclass(frozen=True)
class AudioSignal:
    samples: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate_hz != SAMPLE_RATE:
            raise AudioFormatError(
                f"sample rate {self.sample_rate_hz} Hz not supported, need {SAMPLE_RATE}"
            )
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise AudioFormatError("samples must be one-dimensional")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


def read_wav(path) -> AudioSignal:
    """Read a mono 16 kHz 16-bit PCM WAV file into [-1, 1) floats."""
    with wave.open(str(path), "rb") as wf:
        if wf.getnchannels() != 1:
            raise AudioFormatError(f"{path}: expected mono, got {wf.getnchannels()} channels")
        if wf.getsampwidth() != 2:
            raise AudioFormatError(f"{path}: expected 16-bit samples")
        if wf.getframerate() != SAMPLE_RATE:
            raise AudioFormatError(
                f"{path}: sample rate {wf.getframerate()} Hz, need {SAMPLE_RATE}"
            )
        raw = wf.readframes(wf.getnframes())
    pcm = np.frombuffer(raw, dtype="<i2")
    return AudioSignal(pcm.astype(np.float64) / 32768.0)


def write_wav(path, signal: AudioSignal) -> None:
    pcm = np.clip(np.round(signal.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(signal.sample_rate_hz)
        wf.writeframes(pcm.tobytes())
