#pragma once

#include <cstdint>

#include "cycmpdr/audio.hpp"

namespace cycmpdr {

/// Random-harmonic cyclostationary noise.
///
/// v(t) = sum_p p^-decay a_p(t) cos(2 pi p f0 t + phi_p), where the envelopes
/// share a common factor: a_p = sqrt(beta) g_0 + sqrt(1 - beta) g_p, each g a
/// unit-variance Gaussian process low-passed at `envelope_rate_hz`. Any two
/// envelopes therefore have correlation coefficient beta. With
/// `rectify_envelopes` the magnitude |a_p| is used instead, which adds a
/// deterministic carrier to every harmonic.
struct HarmonicNoiseParams {
    double f0_hz = 100.0;
    std::size_t num_harmonics = 10;
    double correlation = 0.9;
    double envelope_rate_hz = 5.0;
    double amplitude_decay = 0.5;
    bool rectify_envelopes = false;
    std::uint64_t seed = 0;
};

/// Unit-power output; identical for identical parameters.
AudioBuffer synth_harmonic_cs_noise(double duration_sec, double sample_rate, const HarmonicNoiseParams& params);

struct MixSpec {
    double snr_db = 0.0;
    std::uint64_t seed = 0;
};

struct Mixture {
    AudioBuffer mixture;
    AudioBuffer scaled_noise;
};

/// Scales the noise so that the full-utterance speech-to-noise power ratio
/// equals `spec.snr_db`; the speech is left untouched.
Mixture mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise, const MixSpec& spec);

/// Unit-variance Gaussian noise low-passed by a second-order Butterworth
/// section at `cutoff_hz`.
std::vector<double> lowpass_gaussian(std::size_t n, double sample_rate, double cutoff_hz, std::uint64_t seed);

}  // namespace cycmpdr
