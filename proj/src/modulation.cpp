#include "cycmpdr/modulation.hpp"

#include <cmath>
#include <numbers>

#include "cycmpdr/error.hpp"

namespace cycmpdr {

ModulationSet::ModulationSet(std::vector<double> shifts) : shifts_(std::move(shifts)) {
    if (shifts_.empty()) throw Error("modulation set: at least one shift required");
    if (shifts_.front() != 0.0) throw Error("modulation set: first shift must be 0");
    for (std::size_t i = 0; i < shifts_.size(); ++i) {
        if (!std::isfinite(shifts_[i])) throw Error("modulation set: non-finite shift");
        for (std::size_t j = 0; j < i; ++j) {
            if (shifts_[i] == shifts_[j]) throw Error("modulation set: duplicate shift");
        }
    }
}

ModulationSet ModulationSet::harmonic(double f0, std::size_t harmonics) {
    std::vector<double> s{0.0};
    for (std::size_t h = 1; h <= harmonics; ++h) s.push_back(static_cast<double>(h) * f0);
    return ModulationSet(std::move(s));
}

void ModulationSet::check_rate(double sample_rate) const {
    for (double a : shifts_) {
        if (std::abs(a) >= 0.5 * sample_rate) throw Error("modulation set: shift beyond Nyquist");
    }
}

ComplexBuffer modulate(const ComplexBuffer& signal, double alpha) {
    if (!(std::abs(alpha) < 0.5 * signal.sample_rate)) throw Error("modulate: |alpha| must be below fs/2");
    ComplexBuffer out;
    out.sample_rate = signal.sample_rate;
    if (alpha == 0.0) {
        out.samples = signal.samples;
        return out;
    }
    out.samples.resize(signal.size());
    const double step = alpha / signal.sample_rate;
    for (std::size_t n = 0; n < signal.size(); ++n) {
        // Reduce the cycle count first so the phase stays accurate for long inputs.
        double cycles = step * static_cast<double>(n);
        cycles -= std::floor(cycles);
        out.samples[n] = signal.samples[n] * std::polar(1.0, 2.0 * std::numbers::pi * cycles);
    }
    return out;
}

ComplexBuffer modulate(const AudioBuffer& signal, double alpha) {
    return modulate(to_complex(signal), alpha);
}

AugmentedSpectrogram build_augmented(const AudioBuffer& signal, const ModulationSet& modset,
                                     const StftConfig& cfg) {
    modset.check_rate(signal.sample_rate);
    AugmentedSpectrogram aug;
    aug.modset = modset;
    aug.channels.reserve(modset.size());
    const ComplexBuffer base = to_complex(signal);
    for (double alpha : modset.shifts()) {
        aug.channels.push_back(alpha == 0.0 ? stft(base, cfg) : stft(modulate(base, alpha), cfg));
    }
    return aug;
}

}  // namespace cycmpdr
