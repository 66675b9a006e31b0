#include "cycmpdr/speech_sim.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "cycmpdr/error.hpp"
#include "cycmpdr/random.hpp"

namespace cycmpdr {
namespace {

struct Vowel {
    std::array<double, 3> formant;
    std::array<double, 3> bandwidth;
    std::array<double, 3> level;
};

constexpr std::array<Vowel, 5> kVowels{{
    {{730, 1090, 2440}, {90, 110, 160}, {1.0, 0.5, 0.25}},   // a
    {{530, 1840, 2480}, {70, 110, 160}, {1.0, 0.45, 0.3}},   // e
    {{270, 2290, 3010}, {60, 120, 180}, {1.0, 0.3, 0.25}},   // i
    {{570, 840, 2410}, {80, 100, 160}, {1.0, 0.6, 0.15}},    // o
    {{300, 870, 2240}, {60, 100, 150}, {1.0, 0.35, 0.1}},    // u
}};

double formant_gain(const Vowel& v, double f) {
    double g = 0.02;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = (f - v.formant[i]) / v.bandwidth[i];
        g += v.level[i] / (1.0 + d * d);
    }
    return g;
}

double tukey(double t, double len, double taper) {
    const double edge = taper * len;
    if (t < edge) return 0.5 - 0.5 * std::cos(std::numbers::pi * t / edge);
    if (t > len - edge) return 0.5 - 0.5 * std::cos(std::numbers::pi * (len - t) / edge);
    return 1.0;
}

}  // namespace

AudioBuffer synth_speechlike(double duration_sec, double sample_rate, std::uint64_t seed) {
    if (!(duration_sec > 0.0) || !(sample_rate >= 8000.0)) throw Error("speech sim: invalid duration or rate");
    const auto n = static_cast<std::size_t>(std::llround(duration_sec * sample_rate));
    AudioBuffer out;
    out.sample_rate = sample_rate;
    out.samples.assign(n, 0.0);

    Rng rng(mix_seed(seed, 100));
    const double speaker_pitch = rng.uniform(100.0, 220.0);
    const double max_freq = std::min(4000.0, 0.45 * sample_rate);

    std::size_t pos = static_cast<std::size_t>(rng.uniform(0.05, 0.2) * sample_rate);
    while (pos < n) {
        const double syl_sec = rng.uniform(0.12, 0.32);
        const auto len = std::min<std::size_t>(static_cast<std::size_t>(syl_sec * sample_rate), n - pos);
        const double loud = rng.uniform(0.5, 1.0);
        const double len_s = static_cast<double>(len) / sample_rate;

        if (rng.uniform() < 0.85) {
            const Vowel& v = kVowels[static_cast<std::size_t>(rng.uniform() * kVowels.size()) % kVowels.size()];
            const double p0 = speaker_pitch * (1.0 + rng.uniform(-0.2, 0.2));
            const double p1 = speaker_pitch * (1.0 + rng.uniform(-0.2, 0.2));
            const double vib_rate = rng.uniform(4.0, 6.0);
            const double vib_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            double phase = 0.0;  // fundamental phase in cycles
            for (std::size_t i = 0; i < len; ++i) {
                const double t = static_cast<double>(i) / sample_rate;
                const double pitch = (p0 + (p1 - p0) * t / len_s) *
                                     (1.0 + 0.01 * std::sin(2.0 * std::numbers::pi * vib_rate * t + vib_phase));
                phase += pitch / sample_rate;
                phase -= std::floor(phase);
                double s = 0.0;
                for (int h = 1; h * pitch < max_freq; ++h) {
                    const double f = h * pitch;
                    s += formant_gain(v, f) * std::pow(static_cast<double>(h), -0.7) *
                         std::sin(2.0 * std::numbers::pi * h * phase);
                }
                out.samples[pos + i] += loud * tukey(t, len_s, 0.3) * s;
            }
        } else {
            // Fricative: resonant noise around 4-6 kHz.
            const double fc = std::min(rng.uniform(4000.0, 6000.0), 0.4 * sample_rate);
            const double r = 0.9;
            const double c1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * fc / sample_rate), c2 = -r * r;
            double y1 = 0.0, y2 = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                const double t = static_cast<double>(i) / sample_rate;
                const double y = rng.normal() + c1 * y1 + c2 * y2;
                y2 = y1;
                y1 = y;
                out.samples[pos + i] += 0.08 * loud * tukey(t, len_s, 0.3) * y;
            }
        }
        pos += len;
        const double gap = rng.uniform() < 0.15 ? rng.uniform(0.3, 0.6) : rng.uniform(0.04, 0.25);
        pos += static_cast<std::size_t>(gap * sample_rate);
    }

    const double pw = mean_power(out.samples);
    if (pw > 0.0) {
        const double s = 0.1 / std::sqrt(pw);
        for (double& x : out.samples) x *= s;
    }
    return out;
}

}  // namespace cycmpdr
