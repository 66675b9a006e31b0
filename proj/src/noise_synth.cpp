#include "cycmpdr/noise_synth.hpp"

#include <cmath>
#include <numbers>

#include "cycmpdr/error.hpp"
#include "cycmpdr/random.hpp"

namespace cycmpdr {

std::vector<double> lowpass_gaussian(std::size_t n, double sample_rate, double cutoff_hz, std::uint64_t seed) {
    // Bilinear-transform Butterworth biquad.
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
    const double q = std::numbers::sqrt2 / 2.0;
    const double norm = 1.0 / (1.0 + k / q + k * k);
    const double b0 = k * k * norm, b1 = 2.0 * b0, b2 = b0;
    const double a1 = 2.0 * (k * k - 1.0) * norm, a2 = (1.0 - k / q + k * k) * norm;

    // Discard the start-up transient: several time constants of the filter.
    const auto warmup = static_cast<std::size_t>(std::ceil(4.0 * sample_rate / cutoff_hz));
    Rng rng(seed);
    std::vector<double> out(n);
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < warmup + n; ++i) {
        const double x = rng.normal();
        const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = x;
        y2 = y1;
        y1 = y;
        if (i >= warmup) out[i - warmup] = y;
    }
    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double& v : out) {
        v -= mean;
        var += v * v;
    }
    var /= static_cast<double>(n);
    if (var > 0.0) {
        const double s = 1.0 / std::sqrt(var);
        for (double& v : out) v *= s;
    }
    return out;
}

AudioBuffer synth_harmonic_cs_noise(double duration_sec, double sample_rate, const HarmonicNoiseParams& params) {
    if (!(sample_rate > 0.0) || !(duration_sec > 0.0)) throw Error("noise synth: duration and rate must be positive");
    if (params.num_harmonics < 1) throw Error("noise synth: at least one harmonic required");
    if (!(params.f0_hz > 0.0)) throw Error("noise synth: f0 must be positive");
    if (params.f0_hz * static_cast<double>(params.num_harmonics) >= 0.5 * sample_rate) {
        throw Error("noise synth: highest harmonic at or beyond Nyquist");
    }
    if (!(params.correlation >= 0.0 && params.correlation <= 1.0)) throw Error("noise synth: correlation must lie in [0, 1]");
    if (!(params.envelope_rate_hz > 0.0)) throw Error("noise synth: envelope rate must be positive");

    const auto n = static_cast<std::size_t>(std::llround(duration_sec * sample_rate));
    if (n == 0) throw Error("noise synth: duration shorter than one sample");
    const double shared = std::sqrt(params.correlation);
    const double own = std::sqrt(1.0 - params.correlation);

    Rng phases(mix_seed(params.seed, 0));
    const std::vector<double> common = lowpass_gaussian(n, sample_rate, params.envelope_rate_hz, mix_seed(params.seed, 1));

    AudioBuffer out;
    out.sample_rate = sample_rate;
    out.samples.assign(n, 0.0);
    for (std::size_t p = 1; p <= params.num_harmonics; ++p) {
        const double phi = 2.0 * std::numbers::pi * phases.uniform();
        const double gain = std::pow(static_cast<double>(p), -params.amplitude_decay);
        const std::vector<double> g = lowpass_gaussian(n, sample_rate, params.envelope_rate_hz, mix_seed(params.seed, 1 + p));
        const double step = static_cast<double>(p) * params.f0_hz / sample_rate;
        for (std::size_t i = 0; i < n; ++i) {
            double env = shared * common[i] + own * g[i];
            if (params.rectify_envelopes) env = std::abs(env);
            double cycles = step * static_cast<double>(i);
            cycles -= std::floor(cycles);
            out.samples[i] += gain * env * std::cos(2.0 * std::numbers::pi * cycles + phi);
        }
    }
    const double pw = mean_power(out.samples);
    if (pw > 0.0) {
        const double s = 1.0 / std::sqrt(pw);
        for (double& v : out.samples) v *= s;
    }
    return out;
}

Mixture mix_at_snr(const AudioBuffer& speech, const AudioBuffer& noise, const MixSpec& spec) {
    if (speech.size() != noise.size()) throw Error("mix: speech and noise lengths differ");
    if (speech.sample_rate != noise.sample_rate) throw Error("mix: speech and noise sample rates differ");
    if (!std::isfinite(spec.snr_db)) throw Error("mix: SNR must be finite");
    const double ps = mean_power(speech.samples);
    const double pn = mean_power(noise.samples);
    if (!(ps > 0.0) || !(pn > 0.0)) throw Error("mix: zero-power input");

    const double scale = std::sqrt(ps / (pn * std::pow(10.0, spec.snr_db / 10.0)));
    Mixture m;
    m.scaled_noise.sample_rate = m.mixture.sample_rate = speech.sample_rate;
    m.scaled_noise.samples.resize(noise.size());
    m.mixture.samples.resize(noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i) {
        m.scaled_noise.samples[i] = noise.samples[i] * scale;
        m.mixture.samples[i] = speech.samples[i] + m.scaled_noise.samples[i];
    }
    return m;
}

}  // namespace cycmpdr
