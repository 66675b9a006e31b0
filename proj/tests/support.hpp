#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "cycmpdr/audio.hpp"
#include "cycmpdr/random.hpp"

namespace cycmpdr::test {

inline AudioBuffer white_noise(std::size_t n, std::uint64_t seed, double fs = 16000.0, double sigma = 1.0) {
    Rng rng(seed);
    AudioBuffer b;
    b.sample_rate = fs;
    b.samples.resize(n);
    for (auto& v : b.samples) v = sigma * rng.normal();
    return b;
}

inline AudioBuffer tone(std::size_t n, double freq, double amp = 1.0, double fs = 16000.0, double phase = 0.0) {
    AudioBuffer b;
    b.sample_rate = fs;
    b.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.samples[i] = amp * std::cos(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
    }
    return b;
}

inline AudioBuffer add(AudioBuffer a, const AudioBuffer& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a.samples[i] += b.samples[i];
    return a;
}

// Direct O(n^2) DFT, independent of the FFT backend.
inline std::vector<cplx> dft(const std::vector<cplx>& x) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t i = 0; i < n; ++i) {
            acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / static_cast<double>(n));
        }
        out[k] = acc;
    }
    return out;
}

}  // namespace cycmpdr::test
