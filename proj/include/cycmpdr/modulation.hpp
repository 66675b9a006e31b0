#pragma once

#include <cstddef>
#include <vector>

#include "cycmpdr/audio.hpp"
#include "cycmpdr/stft.hpp"

namespace cycmpdr {

/// Ordered frequency shifts in Hz. The first shift is always 0 and the
/// shifts are pairwise distinct.
class ModulationSet {
public:
    ModulationSet() : shifts_{0.0} {}
    explicit ModulationSet(std::vector<double> shifts);

    /// {0, f0, 2 f0, ..., harmonics * f0}.
    static ModulationSet harmonic(double f0, std::size_t harmonics);

    const std::vector<double>& shifts() const noexcept { return shifts_; }
    std::size_t size() const noexcept { return shifts_.size(); }
    double operator[](std::size_t i) const { return shifts_[i]; }

    /// Throws unless every |shift| < sample_rate / 2.
    void check_rate(double sample_rate) const;

    friend bool operator==(const ModulationSet&, const ModulationSet&) = default;

private:
    std::vector<double> shifts_;
};

/// Frequency-shifted copies of one recording, channel c = STFT of the input
/// modulated by shift c.
struct AugmentedSpectrogram {
    std::vector<ComplexSpectrogram> channels;
    ModulationSet modset;

    std::size_t num_channels() const noexcept { return channels.size(); }
    Eigen::Index bins() const noexcept { return channels.empty() ? 0 : channels.front().bins(); }
    Eigen::Index frames() const noexcept { return channels.empty() ? 0 : channels.front().frames(); }
};

/// out[n] = in[n] * exp(+j 2 pi alpha n / fs): content at f moves to f + alpha,
/// so bin w_k of the result reads the input at w_k - alpha.
ComplexBuffer modulate(const ComplexBuffer& signal, double alpha);
ComplexBuffer modulate(const AudioBuffer& signal, double alpha);

AugmentedSpectrogram build_augmented(const AudioBuffer& signal, const ModulationSet& modset,
                                     const StftConfig& cfg);

}  // namespace cycmpdr
