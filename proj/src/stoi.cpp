// Short-time objective intelligibility, following the reference algorithm:
// 10 kHz, 256-sample Hann frames with 50% overlap, 512-point FFT, 15
// one-third octave bands from 150 Hz, 30-frame (384 ms) segments, -15 dB
// clipping, 40 dB energy-based silent-frame removal.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Core>

#include "cycmpdr/error.hpp"
#include "cycmpdr/fft.hpp"
#include "cycmpdr/metrics.hpp"

namespace cycmpdr {
namespace {

constexpr int kFs = 10000;
constexpr std::size_t kFrame = 256;
constexpr std::size_t kHop = 128;
constexpr std::size_t kFft = 512;
constexpr int kBands = 15;
constexpr double kMinFreq = 150.0;
constexpr std::size_t kSegment = 30;
constexpr double kBetaDb = -15.0;
constexpr double kDynRange = 40.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// numpy.hanning(kFrame + 2)[1:-1]
std::vector<double> stoi_window() {
    std::vector<double> w(kFrame);
    const double m = static_cast<double>(kFrame + 1);
    for (std::size_t i = 0; i < kFrame; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) / m);
    }
    return w;
}

void remove_silent_frames(std::vector<double>& x, std::vector<double>& y, const std::vector<double>& w) {
    if (x.size() < kFrame) {
        x.clear();
        y.clear();
        return;
    }
    std::vector<std::size_t> starts;
    std::vector<double> energies;
    for (std::size_t i = 0; i + kFrame <= x.size(); i += kHop) {
        double e = 0.0;
        for (std::size_t j = 0; j < kFrame; ++j) e += (w[j] * x[i + j]) * (w[j] * x[i + j]);
        starts.push_back(i);
        energies.push_back(20.0 * std::log10(std::sqrt(e) + kEps));
    }
    const double top = *std::max_element(energies.begin(), energies.end());
    std::vector<std::size_t> kept;
    for (std::size_t f = 0; f < starts.size(); ++f) {
        if (top - kDynRange - energies[f] < 0.0) kept.push_back(starts[f]);
    }
    const std::size_t len = kept.empty() ? 0 : (kept.size() - 1) * kHop + kFrame;
    std::vector<double> xs(len, 0.0), ys(len, 0.0);
    for (std::size_t f = 0; f < kept.size(); ++f) {
        for (std::size_t j = 0; j < kFrame; ++j) {
            xs[f * kHop + j] += w[j] * x[kept[f] + j];
            ys[f * kHop + j] += w[j] * y[kept[f] + j];
        }
    }
    x = std::move(xs);
    y = std::move(ys);
}

// One-third octave band magnitudes, bands x frames.
Eigen::MatrixXd third_octave(const std::vector<double>& x, const std::vector<double>& w,
                             const std::vector<std::pair<std::size_t, std::size_t>>& bands) {
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i + kFrame < x.size(); i += kHop) starts.push_back(i);
    Eigen::MatrixXd out(kBands, static_cast<Eigen::Index>(starts.size()));
    std::vector<cplx> frame(kFft), spec(kFft);
    for (std::size_t f = 0; f < starts.size(); ++f) {
        std::fill(frame.begin(), frame.end(), cplx{});
        for (std::size_t j = 0; j < kFrame; ++j) frame[j] = w[j] * x[starts[f] + j];
        fft_forward(frame, spec);
        for (int b = 0; b < kBands; ++b) {
            double acc = 0.0;
            for (std::size_t k = bands[static_cast<std::size_t>(b)].first; k < bands[static_cast<std::size_t>(b)].second; ++k) {
                acc += std::norm(spec[k]);
            }
            out(b, static_cast<Eigen::Index>(f)) = std::sqrt(acc);
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> band_edges() {
    const std::size_t nbins = kFft / 2 + 1;
    auto nearest = [&](double freq) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nbins; ++k) {
            const double f = static_cast<double>(k) * kFs / static_cast<double>(kFft);
            const double d = (f - freq) * (f - freq);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        return best;
    };
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (int b = 0; b < kBands; ++b) {
        const double lo = kMinFreq * std::pow(2.0, (2.0 * b - 1.0) / 6.0);
        const double hi = kMinFreq * std::pow(2.0, (2.0 * b + 1.0) / 6.0);
        edges.emplace_back(nearest(lo), nearest(hi));
    }
    return edges;
}

std::vector<double> to_10k(const AudioBuffer& a) {
    const auto fs = static_cast<long>(std::lround(a.sample_rate));
    if (static_cast<double>(fs) != a.sample_rate) throw Error("stoi: non-integer sample rate");
    if (fs == kFs) return a.samples;
    const long g = std::gcd(fs, static_cast<long>(kFs));
    return resample_poly(a.samples, static_cast<int>(kFs / g), static_cast<int>(fs / g));
}

}  // namespace

std::vector<double> resample_poly(std::span<const double> x, int up, int down) {
    if (up < 1 || down < 1) throw Error("resample: factors must be positive");
    const int g = std::gcd(up, down);
    up /= g;
    down /= g;
    if (up == 1 && down == 1) return {x.begin(), x.end()};

    // Kaiser-windowed sinc, 10 zero crossings per side at the narrower band.
    const int max_rate = std::max(up, down);
    const int half = 10 * max_rate;
    const double cutoff = 1.0 / max_rate;  // relative to the upsampled Nyquist
    const double beta = 5.0;
    const std::size_t taps = static_cast<std::size_t>(2 * half + 1);
    std::vector<double> h(taps);
    const double i0b = std::cyl_bessel_i(0.0, beta);
    for (std::size_t i = 0; i < taps; ++i) {
        const double t = static_cast<double>(i) - half;
        const double arg = cutoff * t;
        const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
        const double r = t / half;
        const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[i] = up * cutoff * sinc * kaiser;
    }

    const std::size_t n_out = (x.size() * static_cast<std::size_t>(up) + static_cast<std::size_t>(down) - 1) /
                              static_cast<std::size_t>(down);
    std::vector<double> y(n_out, 0.0);
    const long n_in = static_cast<long>(x.size());
    for (std::size_t m = 0; m < n_out; ++m) {
        // Position on the upsampled grid, shifted by the filter delay.
        const long j = static_cast<long>(m) * down + half;
        long i_lo = (j - static_cast<long>(taps) + 1 + up - 1);
        i_lo = i_lo >= 0 ? i_lo / up : -((-i_lo) / up);
        const long i_hi = std::min(n_in - 1, j / up);
        double acc = 0.0;
        for (long i = std::max(0L, i_lo); i <= i_hi; ++i) acc += x[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(j - i * up)];
        y[m] = acc;
    }
    return y;
}

double stoi(const AudioBuffer& estimate, const AudioBuffer& reference) {
    if (estimate.size() != reference.size()) throw Error("stoi: length mismatch");
    if (estimate.sample_rate != reference.sample_rate) throw Error("stoi: sample rate mismatch");
    if (reference.duration() < 0.384) throw Error("stoi: at least 384 ms of signal required");

    const std::vector<double> w = stoi_window();
    std::vector<double> x = to_10k(reference);
    std::vector<double> y = to_10k(estimate);
    remove_silent_frames(x, y, w);

    const auto bands = band_edges();
    const Eigen::MatrixXd xt = third_octave(x, w, bands);
    const Eigen::MatrixXd yt = third_octave(y, w, bands);
    const Eigen::Index frames = xt.cols();
    if (frames < static_cast<Eigen::Index>(kSegment)) throw Error("stoi: not enough active speech for one segment");

    const double clip = std::pow(10.0, -kBetaDb / 20.0);
    const auto n = static_cast<Eigen::Index>(kSegment);
    double total = 0.0;
    Eigen::Index segments = 0;
    for (Eigen::Index m = n; m <= frames; ++m, ++segments) {
        for (Eigen::Index b = 0; b < kBands; ++b) {
            Eigen::ArrayXd xs = xt.row(b).segment(m - n, n).transpose().array();
            Eigen::ArrayXd ys = yt.row(b).segment(m - n, n).transpose().array();
            const double scale = xs.matrix().norm() / (ys.matrix().norm() + kEps);
            Eigen::ArrayXd yp = (ys * scale).min(xs * (1.0 + clip));
            yp -= yp.mean();
            xs -= xs.mean();
            yp /= yp.matrix().norm() + kEps;
            xs /= xs.matrix().norm() + kEps;
            total += (yp * xs).sum();
        }
    }
    return total / static_cast<double>(kBands * segments);
}

}  // namespace cycmpdr
