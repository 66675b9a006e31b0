#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cycmpdr {

using cplx = std::complex<double>;

/// Real-valued mono waveform.
struct AudioBuffer {
    std::vector<double> samples;
    double sample_rate = 16000.0;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Complex-valued waveform, produced by the modulation bank.
struct ComplexBuffer {
    std::vector<cplx> samples;
    double sample_rate = 16000.0;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
};

ComplexBuffer to_complex(const AudioBuffer& in);
AudioBuffer real_part(const ComplexBuffer& in);

/// Mean of squared samples.
double mean_power(std::span<const double> x);
double energy(std::span<const double> x);

}  // namespace cycmpdr
