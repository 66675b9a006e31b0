#pragma once

#include <Eigen/Core>

#include "cycmpdr/stft.hpp"

namespace cycmpdr {

/// Nonnegative real gains on the K x L grid.
struct RealMask {
    Eigen::MatrixXd gains;
};

struct NoisePsdEstimate {
    Eigen::MatrixXd power;
    double window_sec = 1.5;
    double smooth_alpha = 0.85;
    double bias = 1.5;
};

struct MinStatsParams {
    double window_sec = 1.5;
    double smooth_alpha = 0.85;
    double bias = 1.5;
    double gain_floor = 0.05623413251903491;  // -25 dB
};

ComplexSpectrogram identity_preproc(const ComplexSpectrogram& x);

/// P(k, l) = alpha P(k, l-1) + (1 - alpha) |x(k, l)|^2, seeded with the first frame.
Eigen::MatrixXd smoothed_power(const ComplexSpectrogram& x, double alpha);

/// bias * causal sliding minimum of the smoothed periodogram over `window_sec`.
NoisePsdEstimate min_stats_noise_psd(const ComplexSpectrogram& noisy, double window_sec = 1.5,
                                     double smooth_alpha = 0.85, double bias = 1.5);

/// G = max(1 - noise / P, gain_floor) with P the smoothed noisy power.
RealMask wiener_gain(const ComplexSpectrogram& noisy, const NoisePsdEstimate& noise, double gain_floor);
ComplexSpectrogram wiener_apply(const ComplexSpectrogram& noisy, const NoisePsdEstimate& noise, double gain_floor);

ComplexSpectrogram apply_mask(const ComplexSpectrogram& y, const RealMask& mask);

/// sqrt(|S|^2 / (|S|^2 + |N|^2 + eps)).
RealMask oracle_irm(const ComplexSpectrogram& clean, const ComplexSpectrogram& residual_noise, double eps = 1e-12);

}  // namespace cycmpdr
