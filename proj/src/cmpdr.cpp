#include "cycmpdr/cmpdr.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include <Eigen/Cholesky>

#include "cycmpdr/error.hpp"

namespace cycmpdr {

SpectralCovariance SpectralCovariance::scaled_identity(std::size_t channels, double delta, double beta) {
    SpectralCovariance s;
    s.beta = beta;
    const auto c = static_cast<Eigen::Index>(channels);
    s.matrix = CovMatrix::Identity(c, c) * delta;
    return s;
}

void update_covariance_inplace(CovMatrix& s, const ChannelVector& x, double beta) {
    s *= beta;
    s.noalias() += (1.0 - beta) * (x * x.adjoint());
}

SpectralCovariance update_covariance(const SpectralCovariance& prev, std::span<const cplx> x) {
    if (!(prev.beta > 0.0 && prev.beta < 1.0)) throw Error("covariance: beta must lie in (0, 1)");
    if (x.size() != prev.channels()) throw Error("covariance: vector dimension does not match covariance");
    SpectralCovariance next = prev;
    const ChannelVector v = Eigen::Map<const Eigen::VectorXcd>(x.data(), static_cast<Eigen::Index>(x.size()));
    update_covariance_inplace(next.matrix, v, prev.beta);
    return next;
}

BeamformerWeights solve_weights(const CovMatrix& s, double loading) {
    const Eigen::Index c = s.rows();
    if (c == 0 || s.cols() != c) throw Error("solve_weights: covariance must be square and non-empty");
    if (c > kMaxChannels) throw Error("solve_weights: too many channels");

    BeamformerWeights out;
    out.w = ChannelVector::Zero(c);
    out.w(0) = 1.0;
    if (c == 1) return out;

    const double lambda = loading * s.trace().real() / static_cast<double>(c);
    CovMatrix loaded = s;
    loaded.diagonal().array() += lambda;

    Eigen::LLT<CovMatrix> llt(loaded);
    if (llt.info() != Eigen::Success) {
        out.passthrough = true;
        return out;
    }
    ChannelVector e1 = ChannelVector::Zero(c);
    e1(0) = 1.0;
    const ChannelVector a = llt.solve(e1);
    const double denom = a(0).real();
    if (!(denom > 0.0) || !std::isfinite(denom) || !a.allFinite()) {
        out.passthrough = true;
        return out;
    }
    out.w = a / denom;
    out.w(0) = 1.0;  // e1^H S^-1 e1 is real; drop rounding residue
    return out;
}

CmpdrResult process(const AugmentedSpectrogram& aug, const CmpdrParams& params,
                    std::span<const AugmentedSpectrogram> companions, const FrameObserver& observer,
                    CmpdrDiagnostics* diagnostics) {
    const std::size_t channels = aug.num_channels();
    if (channels == 0) throw Error("cmpdr: augmented spectrogram has no channels");
    if (channels > static_cast<std::size_t>(kMaxChannels)) throw Error("cmpdr: too many channels");
    if (!(params.beta > 0.0 && params.beta < 1.0)) throw Error("cmpdr: beta must lie in (0, 1)");
    if (params.weight_stride == 0) throw Error("cmpdr: weight stride must be positive");
    for (const auto& ch : aug.channels) {
        if (!ch.same_shape(aug.channels.front())) throw Error("cmpdr: channel shapes differ");
    }
    for (const auto& comp : companions) {
        if (comp.modset != aug.modset || comp.num_channels() != channels) {
            throw Error("cmpdr: companion modulation set differs");
        }
        for (const auto& ch : comp.channels) {
            if (!ch.same_shape(aug.channels.front())) throw Error("cmpdr: companion shape differs");
        }
    }

    const Eigen::Index bins = aug.bins();
    const Eigen::Index frames = aug.frames();
    const auto c = static_cast<Eigen::Index>(channels);

    CmpdrResult result;
    result.output = aug.channels.front();
    for (const auto& comp : companions) result.companions.push_back(comp.channels.front());

    if (diagnostics) {
        diagnostics->bins = bins;
        diagnostics->frames = frames;
        diagnostics->channels = channels;
        diagnostics->final_cov.assign(static_cast<std::size_t>(bins), CovMatrix::Zero(c, c));
        diagnostics->weights.assign(static_cast<std::size_t>(bins * frames) * channels, cplx{});
    }

    // A single channel is the identity preprocessor.
    if (channels == 1) {
        if (diagnostics) {
            for (Eigen::Index k = 0; k < bins; ++k) {
                for (Eigen::Index l = 0; l < frames; ++l) {
                    diagnostics->weights[static_cast<std::size_t>(k * frames + l)] = 1.0;
                }
            }
        }
        return result;
    }

    const Eigen::Index warm = std::min<Eigen::Index>(frames, static_cast<Eigen::Index>(params.init_frames));
    ChannelVector x(c);
    for (Eigen::Index k = 0; k < bins; ++k) {
        double init_power = 0.0;
        for (Eigen::Index l = 0; l < warm; ++l) {
            for (Eigen::Index ch = 0; ch < c; ++ch) init_power += std::norm(aug.channels[static_cast<std::size_t>(ch)].data(k, l));
        }
        if (warm > 0) init_power /= static_cast<double>(warm * c);
        CovMatrix s = CovMatrix::Identity(c, c) * (params.init_scale * init_power);

        BeamformerWeights weights;
        for (Eigen::Index l = 0; l < frames; ++l) {
            for (Eigen::Index ch = 0; ch < c; ++ch) x(ch) = aug.channels[static_cast<std::size_t>(ch)].data(k, l);
            update_covariance_inplace(s, x, params.beta);

            if (l % static_cast<Eigen::Index>(params.weight_stride) == 0) {
                weights = solve_weights(s, params.loading);
                if (weights.passthrough) {
                    ++result.stats.passthrough;
                } else {
                    ++result.stats.solved;
                }
            }
            result.output.data(k, l) = weights.w.dot(x);  // w^H x
            for (std::size_t i = 0; i < companions.size(); ++i) {
                for (Eigen::Index ch = 0; ch < c; ++ch) x(ch) = companions[i].channels[static_cast<std::size_t>(ch)].data(k, l);
                result.companions[i].data(k, l) = weights.w.dot(x);
            }
            if (observer) observer(k, l, s, weights);
            if (diagnostics) {
                auto* dst = &diagnostics->weights[static_cast<std::size_t>(k * frames + l) * channels];
                for (Eigen::Index ch = 0; ch < c; ++ch) dst[ch] = weights.w(ch);
            }
        }
        if (diagnostics) diagnostics->final_cov[static_cast<std::size_t>(k)] = s;
    }
    return result;
}

// --- sidecar ---------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "diagnostic dump assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

void put_c64(std::ostream& os, cplx v) {
    const float parts[2] = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
    os.write(reinterpret_cast<const char*>(parts), sizeof parts);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

cplx get_c64(std::istream& is) {
    float parts[2] = {0.0f, 0.0f};
    is.read(reinterpret_cast<char*>(parts), sizeof parts);
    return {parts[0], parts[1]};
}

}  // namespace

void write_diagnostics(const std::filesystem::path& path, const CmpdrDiagnostics& diag) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cmpdr: cannot open diagnostics file " + path.string());
    os.write("CMPD", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(diag.bins));
    put_u32(os, static_cast<std::uint32_t>(diag.channels));
    put_u32(os, static_cast<std::uint32_t>(diag.frames));
    const auto c = static_cast<Eigen::Index>(diag.channels);
    for (Eigen::Index k = 0; k < diag.bins; ++k) {
        const CovMatrix& s = diag.final_cov[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < c; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) put_c64(os, s(i, j));
        }
        const std::size_t base = static_cast<std::size_t>(k * diag.frames) * diag.channels;
        for (std::size_t n = 0; n < static_cast<std::size_t>(diag.frames) * diag.channels; ++n) put_c64(os, diag.weights[base + n]);
    }
    if (!os) throw Error("cmpdr: failed writing diagnostics file " + path.string());
}

CmpdrDiagnostics read_diagnostics(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cmpdr: cannot open diagnostics file " + path.string());
    char magic[4] = {};
    is.read(magic, 4);
    if (std::string(magic, 4) != "CMPD" || get_u32(is) != 1) throw Error("cmpdr: not a diagnostics file");
    CmpdrDiagnostics d;
    d.bins = get_u32(is);
    d.channels = get_u32(is);
    d.frames = get_u32(is);
    const auto c = static_cast<Eigen::Index>(d.channels);
    d.final_cov.assign(static_cast<std::size_t>(d.bins), CovMatrix::Zero(c, c));
    d.weights.resize(static_cast<std::size_t>(d.bins * d.frames) * d.channels);
    for (Eigen::Index k = 0; k < d.bins; ++k) {
        for (Eigen::Index i = 0; i < c; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) d.final_cov[static_cast<std::size_t>(k)](i, j) = get_c64(is);
        }
        const std::size_t base = static_cast<std::size_t>(k * d.frames) * d.channels;
        for (std::size_t n = 0; n < static_cast<std::size_t>(d.frames) * d.channels; ++n) d.weights[base + n] = get_c64(is);
    }
    if (!is) throw Error("cmpdr: truncated diagnostics file");
    return d;
}

}  // namespace cycmpdr
