"""Cyclic MPDR speech enhancement."""

from ._core import (
    CycmpdrError,
    StftConfig,
    enhance,
    estimate_modulation_set,
    harmonic_noise,
    istft,
    mix,
    modulate,
    read_wav,
    si_sdr,
    spectral_coherence,
    speechlike,
    stft,
    stoi,
    wiener,
    write_wav,
)

__all__ = [
    "CycmpdrError",
    "StftConfig",
    "enhance",
    "estimate_modulation_set",
    "harmonic_noise",
    "istft",
    "mix",
    "modulate",
    "read_wav",
    "si_sdr",
    "spectral_coherence",
    "speechlike",
    "stft",
    "stoi",
    "wiener",
    "write_wav",
]
