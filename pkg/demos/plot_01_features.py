"""
From waveform to features
=========================

A one-second synthetic voice goes through the three audio front ends:
log-mel filter banks, MFCCs with deltas, and the prosodic contour.
"""

import numpy as np

from dialectid.dsp import log_mel_fb, mel_center_frequencies, mfcc39
from dialectid.prosody import FUNCTIONAL_NAMES, functionals, prosodic_contour
from dialectid.synth import synth_utterance

rng = np.random.default_rng(0)
signal = synth_utterance(150.0, 1.0, rng)
print(f"{signal.duration_s:.2f} s of audio, {len(signal.samples)} samples")

###############################################################################
# Filter banks: 40 log energies per 10 ms frame. This synthetic voice has a
# shallow harmonic roll-off, and pre-emphasis lifts the top of the spectrum,
# so the wide high-frequency filters end up with the most energy.
fb = log_mel_fb(signal)
centers = mel_center_frequencies(40)
loudest = np.argsort(fb.values.mean(axis=0))[::-1][:3]
print("FB40 shape", fb.values.shape)
print("loudest filters centred at", np.round(centers[loudest]).astype(int), "Hz")

###############################################################################
# MFCCs decorrelate the filter banks; deltas and delta-deltas are appended.
m = mfcc39(signal)
print("MFCC39 shape", m.values.shape)
print("mean c0..c3:", np.round(m.values[:, :4].mean(axis=0), 2))

###############################################################################
# Prosody: f0, energy and spectral tilt per frame. The pause inside the
# utterance shows up as unvoiced frames.
contour = prosodic_contour(signal)
voiced = contour.voiced
print(f"voiced frames: {voiced.sum()} of {len(voiced)}")
print(f"median f0: {np.median(contour.f0_hz[voiced]):.1f} Hz")

###############################################################################
# Utterance functionals summarise each contour with a handful of numbers.
values = functionals(contour, signal.duration_s)
for name, v in list(zip(FUNCTIONAL_NAMES, values))[:7]:
    print(f"  {name:<20} {v: .3f}")
