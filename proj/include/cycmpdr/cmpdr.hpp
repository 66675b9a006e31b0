#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cycmpdr/modulation.hpp"
#include "cycmpdr/stft.hpp"

namespace cycmpdr {

inline constexpr int kMaxChannels = 16;

using CovMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxChannels, kMaxChannels>;
using ChannelVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxChannels, 1>;

/// Recursively averaged C x C covariance of the augmented vector at one bin.
struct SpectralCovariance {
    CovMatrix matrix;
    double beta = 0.95;

    static SpectralCovariance scaled_identity(std::size_t channels, double delta, double beta = 0.95);
    std::size_t channels() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

/// S <- beta S + (1 - beta) x x^H.
SpectralCovariance update_covariance(const SpectralCovariance& prev, std::span<const cplx> x);
void update_covariance_inplace(CovMatrix& s, const ChannelVector& x, double beta);

struct BeamformerWeights {
    ChannelVector w;
    bool passthrough = false;  // solve failed; w = e1
};

/// Distortionless minimum-power weights w = S^-1 e1 / (e1^H S^-1 e1), solved
/// on S + lambda I with lambda = loading * trace(S) / C. Falls back to e1 when
/// the loaded matrix is not numerically positive definite.
BeamformerWeights solve_weights(const CovMatrix& s, double loading = 1e-6);

struct CmpdrParams {
    double beta = 0.95;
    double loading = 1e-6;
    double init_scale = 1e-3;      // initial covariance = init_scale * mean power * I
    std::size_t init_frames = 10;
    std::size_t weight_stride = 1; // recompute weights every `weight_stride` frames
};

struct CmpdrStats {
    std::size_t solved = 0;
    std::size_t passthrough = 0;
};

/// Called once per (bin, frame) with the covariance after the update and the
/// weights applied at that frame.
using FrameObserver =
    std::function<void(Eigen::Index bin, Eigen::Index frame, const CovMatrix& cov, const BeamformerWeights& w)>;

/// Per-bin final covariance and full weight trajectory, for the sidecar dump.
struct CmpdrDiagnostics {
    Eigen::Index bins = 0;
    Eigen::Index frames = 0;
    std::size_t channels = 0;
    std::vector<CovMatrix> final_cov;    // one per bin
    std::vector<cplx> weights;           // [bin][frame][channel]
};

struct CmpdrResult {
    ComplexSpectrogram output;
    std::vector<ComplexSpectrogram> companions;
    CmpdrStats stats;
};

/// y(k, l) = w(k, l)^H x(k, l). Weights are derived from `aug` only; every
/// companion (same modulation set and shape) is filtered with the same
/// weights, e.g. the clean reference for oracle masks.
CmpdrResult process(const AugmentedSpectrogram& aug, const CmpdrParams& params,
                    std::span<const AugmentedSpectrogram> companions = {}, const FrameObserver& observer = {},
                    CmpdrDiagnostics* diagnostics = nullptr);

/// Binary layout, little endian: magic "CMPD", u32 version = 1, u32 K, u32 C,
/// u32 L; then for every bin: C*C complex64 final covariance (row-major),
/// followed by L*C complex64 weights (frame-major).
void write_diagnostics(const std::filesystem::path& path, const CmpdrDiagnostics& diag);
CmpdrDiagnostics read_diagnostics(const std::filesystem::path& path);

}  // namespace cycmpdr
