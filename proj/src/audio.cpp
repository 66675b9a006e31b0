#include "cycmpdr/audio.hpp"

#include <numeric>

namespace cycmpdr {

ComplexBuffer to_complex(const AudioBuffer& in) {
    ComplexBuffer out;
    out.sample_rate = in.sample_rate;
    out.samples.assign(in.samples.begin(), in.samples.end());
    return out;
}

AudioBuffer real_part(const ComplexBuffer& in) {
    AudioBuffer out;
    out.sample_rate = in.sample_rate;
    out.samples.resize(in.samples.size());
    for (std::size_t n = 0; n < in.samples.size(); ++n) out.samples[n] = in.samples[n].real();
    return out;
}

double energy(std::span<const double> x) {
    return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

double mean_power(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return energy(x) / static_cast<double>(x.size());
}

}  // namespace cycmpdr
