#include "cycmpdr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "cycmpdr/error.hpp"

namespace cycmpdr {

ComplexSpectrogram identity_preproc(const ComplexSpectrogram& x) { return x; }

Eigen::MatrixXd smoothed_power(const ComplexSpectrogram& x, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw Error("smoothed power: alpha must lie in [0, 1)");
    const Eigen::MatrixXd inst = x.data.cwiseAbs2();
    Eigen::MatrixXd p(inst.rows(), inst.cols());
    if (inst.cols() == 0) return p;
    p.col(0) = inst.col(0);
    for (Eigen::Index l = 1; l < inst.cols(); ++l) p.col(l) = alpha * p.col(l - 1) + (1.0 - alpha) * inst.col(l);
    return p;
}

NoisePsdEstimate min_stats_noise_psd(const ComplexSpectrogram& noisy, double window_sec, double smooth_alpha,
                                     double bias) {
    if (!(window_sec > 0.0) || !(bias > 0.0)) throw Error("min stats: window and bias must be positive");
    const StftConfig& cfg = noisy.config;
    const double duration = static_cast<double>(noisy.signal_length) / cfg.sample_rate;
    if (duration < window_sec) throw Error("min stats: recording shorter than the search window");

    const Eigen::MatrixXd p = smoothed_power(noisy, smooth_alpha);
    const auto window = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::lround(window_sec * cfg.sample_rate / static_cast<double>(cfg.hop))));

    NoisePsdEstimate est;
    est.window_sec = window_sec;
    est.smooth_alpha = smooth_alpha;
    est.bias = bias;
    est.power.resize(p.rows(), p.cols());
    // Monotone deque gives the sliding minimum in O(L) per bin.
    std::deque<Eigen::Index> q;
    for (Eigen::Index k = 0; k < p.rows(); ++k) {
        q.clear();
        for (Eigen::Index l = 0; l < p.cols(); ++l) {
            while (!q.empty() && p(k, q.back()) >= p(k, l)) q.pop_back();
            q.push_back(l);
            if (q.front() <= l - window) q.pop_front();
            est.power(k, l) = bias * p(k, q.front());
        }
    }
    return est;
}

RealMask wiener_gain(const ComplexSpectrogram& noisy, const NoisePsdEstimate& noise, double gain_floor) {
    if (!(gain_floor > 0.0 && gain_floor < 1.0)) throw Error("wiener: gain floor must lie in (0, 1)");
    if (noise.power.rows() != noisy.bins() || noise.power.cols() != noisy.frames()) {
        throw Error("wiener: noise estimate shape differs from spectrogram");
    }
    const Eigen::MatrixXd p = smoothed_power(noisy, noise.smooth_alpha);
    RealMask g;
    g.gains.resize(p.rows(), p.cols());
    for (Eigen::Index l = 0; l < p.cols(); ++l) {
        for (Eigen::Index k = 0; k < p.rows(); ++k) {
            const double n = noise.power(k, l);
            const double gain = p(k, l) > 0.0 ? 1.0 - n / p(k, l) : (n > 0.0 ? 0.0 : 1.0);
            g.gains(k, l) = std::clamp(gain, gain_floor, 1.0);
        }
    }
    return g;
}

ComplexSpectrogram wiener_apply(const ComplexSpectrogram& noisy, const NoisePsdEstimate& noise, double gain_floor) {
    return apply_mask(noisy, wiener_gain(noisy, noise, gain_floor));
}

ComplexSpectrogram apply_mask(const ComplexSpectrogram& y, const RealMask& mask) {
    if (mask.gains.rows() != y.bins() || mask.gains.cols() != y.frames()) throw Error("mask: shape differs from spectrogram");
    ComplexSpectrogram out = y;
    out.data.array() *= mask.gains.array().cast<cplx>();
    return out;
}

RealMask oracle_irm(const ComplexSpectrogram& clean, const ComplexSpectrogram& residual_noise, double eps) {
    if (!clean.same_shape(residual_noise)) throw Error("oracle mask: shape mismatch");
    const Eigen::ArrayXXd s = clean.data.cwiseAbs2().array();
    const Eigen::ArrayXXd n = residual_noise.data.cwiseAbs2().array();
    RealMask m;
    m.gains = (s / (s + n + eps)).sqrt().matrix();
    return m;
}

}  // namespace cycmpdr
