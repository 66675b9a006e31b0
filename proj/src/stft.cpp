#include "cycmpdr/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cycmpdr/error.hpp"
#include "cycmpdr/fft.hpp"

namespace cycmpdr {
namespace {

std::vector<double> overlap_sum(const StftConfig& cfg) {
    std::vector<double> acc(cfg.hop, 0.0);
    for (std::size_t n = 0; n < cfg.frame_len; ++n) acc[n % cfg.hop] += cfg.window[n] * cfg.window[n];
    return acc;
}

}  // namespace

StftConfig StftConfig::sqrt_hann(double sample_rate, double frame_ms, double hop_ms,
                                 std::size_t fft_size) {
    StftConfig cfg;
    cfg.sample_rate = sample_rate;
    cfg.frame_len = static_cast<std::size_t>(std::lround(frame_ms * 1e-3 * sample_rate));
    cfg.hop = static_cast<std::size_t>(std::lround(hop_ms * 1e-3 * sample_rate));
    cfg.fft_size = fft_size == 0 ? cfg.frame_len : fft_size;
    cfg.window.resize(cfg.frame_len);
    const double n = static_cast<double>(cfg.frame_len);
    for (std::size_t i = 0; i < cfg.frame_len; ++i) {
        cfg.window[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n));
    }
    cfg.validate();
    return cfg;
}

void StftConfig::validate() const {
    if (sample_rate <= 0.0) throw Error("stft: sample rate must be positive");
    if (frame_len == 0 || hop == 0) throw Error("stft: frame length and hop must be positive");
    if (frame_len > fft_size) throw Error("stft: frame length exceeds FFT size");
    if (frame_len % hop != 0) throw Error("stft: hop must divide the frame length");
    if (window.size() != frame_len) throw Error("stft: window length differs from frame length");
    const auto acc = overlap_sum(*this);
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
    if (!(mean > 0.0)) throw Error("stft: window overlap-add is zero");
    for (double v : acc) {
        if (std::abs(v - mean) > 1e-10 * mean) throw Error("stft: window pair violates constant overlap-add");
    }
}

double StftConfig::cola_gain() const {
    const auto acc = overlap_sum(*this);
    return std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
}

std::size_t StftConfig::num_frames(std::size_t n) const noexcept {
    if (n == 0) return 0;
    // Every input sample is covered by frame_len / hop frames.
    return (n - 1 + edge_pad()) / hop + 1;
}

ComplexSpectrogram stft(const ComplexBuffer& signal, const StftConfig& cfg) {
    if (signal.empty()) throw Error("stft: empty signal");
    if (signal.sample_rate != cfg.sample_rate) throw Error("stft: signal sample rate does not match config");
    cfg.validate();

    const std::size_t n = signal.size();
    const std::size_t frames = cfg.num_frames(n);
    const std::size_t pad = cfg.edge_pad();

    ComplexSpectrogram out;
    out.config = cfg;
    out.signal_length = n;
    out.data.resize(static_cast<Eigen::Index>(cfg.fft_size), static_cast<Eigen::Index>(frames));

    std::vector<cplx> frame(cfg.fft_size);
    for (std::size_t l = 0; l < frames; ++l) {
        std::fill(frame.begin(), frame.end(), cplx{});
        for (std::size_t i = 0; i < cfg.frame_len; ++i) {
            // Position in the zero-padded signal is l*hop + i.
            const std::size_t pos = l * cfg.hop + i;
            if (pos < pad || pos - pad >= n) continue;
            frame[i] = signal.samples[pos - pad] * cfg.window[i];
        }
        fft_forward(frame, {out.data.col(static_cast<Eigen::Index>(l)).data(), cfg.fft_size});
    }
    return out;
}

ComplexSpectrogram stft(const AudioBuffer& signal, const StftConfig& cfg) {
    return stft(to_complex(signal), cfg);
}

ComplexBuffer istft(const ComplexSpectrogram& spec) {
    const StftConfig& cfg = spec.config;
    cfg.validate();
    const std::size_t frames = static_cast<std::size_t>(spec.frames());
    if (spec.bins() != static_cast<Eigen::Index>(cfg.fft_size)) throw Error("istft: bin count differs from FFT size");
    if (frames != cfg.num_frames(spec.signal_length)) throw Error("istft: frame count inconsistent with signal length");

    const std::size_t pad = cfg.edge_pad();
    const std::size_t total = (frames == 0 ? 0 : (frames - 1) * cfg.hop + cfg.frame_len);
    std::vector<cplx> acc(total, cplx{});
    std::vector<cplx> frame(cfg.fft_size);
    for (std::size_t l = 0; l < frames; ++l) {
        fft_inverse({spec.data.col(static_cast<Eigen::Index>(l)).data(), cfg.fft_size}, frame);
        for (std::size_t i = 0; i < cfg.frame_len; ++i) acc[l * cfg.hop + i] += frame[i] * cfg.window[i];
    }

    const double gain = 1.0 / cfg.cola_gain();
    ComplexBuffer out;
    out.sample_rate = cfg.sample_rate;
    out.samples.resize(spec.signal_length);
    for (std::size_t n = 0; n < spec.signal_length; ++n) out.samples[n] = acc[n + pad] * gain;
    return out;
}

}  // namespace cycmpdr
