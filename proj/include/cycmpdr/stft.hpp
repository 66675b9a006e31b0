#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "cycmpdr/audio.hpp"

namespace cycmpdr {

/// Frame geometry and analysis/synthesis window of the STFT.
///
/// The same window is used for analysis and synthesis; the product of the
/// pair must overlap-add to a constant at the configured hop.
struct StftConfig {
    std::size_t frame_len = 512;
    std::size_t hop = 128;
    std::size_t fft_size = 512;
    std::vector<double> window;
    double sample_rate = 16000.0;

    /// Square-root periodic Hann window, frame and hop given in milliseconds.
    /// `fft_size == 0` selects the frame length.
    static StftConfig sqrt_hann(double sample_rate, double frame_ms = 32.0, double hop_ms = 8.0,
                                std::size_t fft_size = 0);

    /// Throws if the geometry is inconsistent or the window pair is not COLA
    /// within 1e-10 relative deviation.
    void validate() const;

    /// Constant value of the overlap-added squared window.
    double cola_gain() const;

    /// Leading zero padding in samples.
    std::size_t edge_pad() const noexcept { return frame_len - hop; }

    /// Number of frames produced for a signal of `n` samples.
    std::size_t num_frames(std::size_t n) const noexcept;
};

/// Two-sided STFT grid, K = fft_size rows by L frames.
struct ComplexSpectrogram {
    Eigen::MatrixXcd data;
    StftConfig config;
    std::size_t signal_length = 0;

    Eigen::Index bins() const noexcept { return data.rows(); }
    Eigen::Index frames() const noexcept { return data.cols(); }
    bool same_shape(const ComplexSpectrogram& other) const noexcept {
        return data.rows() == other.data.rows() && data.cols() == other.data.cols();
    }
};

ComplexSpectrogram stft(const ComplexBuffer& signal, const StftConfig& cfg);
ComplexSpectrogram stft(const AudioBuffer& signal, const StftConfig& cfg);

/// Weighted overlap-add synthesis; returns `spec.signal_length` samples.
ComplexBuffer istft(const ComplexSpectrogram& spec);

}  // namespace cycmpdr
