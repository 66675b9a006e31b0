#pragma once

#include <cstdint>

#include "cycmpdr/audio.hpp"

namespace cycmpdr {

/// Speech-like test signal: voiced syllables (gliding pitch, harmonic source
/// shaped by vowel formants), occasional fricatives, and pauses. Stands in
/// for a clean-speech corpus in tests and demos. RMS is 0.1.
AudioBuffer synth_speechlike(double duration_sec, double sample_rate, std::uint64_t seed);

}  // namespace cycmpdr
