"""Synthetic four-dialect corpus for end-to-end checks and demos.

Each "dialect" has its own f0 register (20 Hz apart) and harmonic spectral
slope; speakers jitter around their dialect's values, and utterances vary
in intonation, loudness and pauses. Per-speaker recording level gives
speaker-dependent models an idiosyncrasy to exploit.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio import SAMPLE_RATE, AudioSignal, write_wav
from .corpus import DIALECTS, UtteranceRecord, serialize_manifest

F0_REGISTER_HZ = {"WF": 120.0, "EF": 140.0, "SS": 160.0, "TS": 180.0}
HARMONIC_SLOPE = {"WF": 0.2, "EF": 0.7, "SS": 1.2, "TS": 1.7}
MAJORITY = {"WF": "no", "EF": "fi", "SS": "no", "TS": "sv"}


def synth_voice(f0_track: np.ndarray, slope: float, rng: np.random.Generator,
                noise_db: float = -50.0, fmax_harm: float = 6000.0) -> np.ndarray:
    """Harmonic source following ``f0_track`` with amplitudes ~ k**-slope."""
    sr = SAMPLE_RATE
    phase = 2.0 * np.pi * np.cumsum(f0_track) / sr
    n_harm = int(fmax_harm // f0_track.max())
    k = np.arange(1, n_harm + 1)
    amps = k ** (-slope)
    offsets = rng.uniform(0, 2 * np.pi, n_harm)
    x = amps @ np.sin(k[:, None] * phase[None, :] + offsets[:, None])
    x /= np.sqrt(np.mean(x**2)) + 1e-12
    return x + 10 ** (noise_db / 20.0) * rng.standard_normal(len(x))


def synth_utterance(register_hz: float, slope: float, rng: np.random.Generator,
                    duration_s: float = 1.0, depth_hz: float = 8.0,
                    gain_db: float = -10.0) -> AudioSignal:
    n = int(duration_s * SAMPLE_RATE)
    t = np.arange(n) / SAMPLE_RATE
    depth = depth_hz * rng.uniform(0.8, 1.2)
    rate = rng.uniform(1.0, 3.0)
    decl = rng.uniform(-10.0, 0.0)
    f0 = register_hz + depth * np.sin(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi)) \
        + decl * t / duration_s
    x = synth_voice(f0, slope, rng)
    # one pause of 100-140 ms somewhere in the middle
    gap = int(rng.uniform(0.10, 0.14) * SAMPLE_RATE)
    start = int(rng.uniform(0.3, 0.6) * n)
    seg = x[start:start + gap]
    seg[:] = 10 ** (-25.0 / 20.0) * rng.standard_normal(len(seg))
    gain = 10 ** ((gain_db + rng.uniform(-1.0, 1.0)) / 20.0)
    return AudioSignal(np.clip(gain * x, -1.0, 1.0))


def make_synthetic_corpus(out_dir, speakers_per_dialect: int = 10, utts_per_speaker: int = 25,
                          seed: int = 0, duration_s: float = 1.0,
                          speaker_f0_sd: float = 5.0, speaker_slope_sd: float = 0.12,
                          speaker_gain_db: float = 3.0, intonation_hz: float = 8.0):
    """Write WAV files plus ``manifest.jsonl`` under ``out_dir``; return the records.

    Record sources are relative to ``out_dir`` (``load_manifest`` resolves them).
    """
    out = Path(out_dir)
    (out / "wav").mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(seed))
    records = []
    for dialect in DIALECTS:
        for s in range(speakers_per_dialect):
            spk = f"{dialect}{s:02d}"
            register = F0_REGISTER_HZ[dialect] + speaker_f0_sd * rng.standard_normal()
            slope = HARMONIC_SLOPE[dialect] + speaker_slope_sd * rng.standard_normal()
            # recording level is a speaker habit unrelated to dialect
            gain_db = -10.0 + speaker_gain_db * rng.uniform(-1.0, 1.0)
            gender = "fm"[s % 2]
            for u in range(utts_per_speaker):
                utt = f"{spk}_{u:03d}"
                dur = duration_s * rng.uniform(0.9, 1.1)
                sig = synth_utterance(register, slope, rng, dur, intonation_hz, gain_db)
                path = out / "wav" / f"{utt}.wav"
                write_wav(path, sig)
                records.append(UtteranceRecord(
                    utt_id=utt, source=f"wav/{utt}.wav", speaker_id=spk, dialect=dialect,
                    majority_language=MAJORITY[dialect], gender=gender,
                    dataset_name="synthetic", style="read" if u % 3 == 0 else "spontaneous",
                    duration_s=round(sig.duration_s, 4),
                ))
    (out / "manifest.jsonl").write_text(serialize_manifest(records), encoding="utf-8")
    return records
