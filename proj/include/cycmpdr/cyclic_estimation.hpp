#pragma once

#include <cstddef>
#include <vector>

#include "cycmpdr/audio.hpp"
#include "cycmpdr/modulation.hpp"
#include "cycmpdr/stft.hpp"

namespace cycmpdr {

/// One-sided power spectral density on a uniform grid 0 .. fs/2.
struct Psd {
    std::vector<double> power;
    double resolution_hz = 0.0;
    std::size_t segments = 0;

    double frequency(std::size_t bin) const noexcept { return static_cast<double>(bin) * resolution_hz; }
};

/// Welch average of periodic-Hann-windowed segments, density scaling
/// (a unit-variance white sequence gives 2 / fs).
Psd welch_periodogram(const AudioBuffer& signal, std::size_t seg_len = 4096, double overlap = 0.5);

struct PeakList {
    std::vector<double> frequencies;  // strictly increasing
    std::vector<double> powers;
    double resolution_hz = 0.0;

    std::size_t size() const noexcept { return frequencies.size(); }
    bool empty() const noexcept { return frequencies.empty(); }
};

struct PeakPickOptions {
    std::size_t max_peaks = 20;
    double threshold_db = 10.0;         // above the PSD median
    std::size_t min_separation_bins = 2;
    bool interpolate = true;            // log-parabolic sub-bin location
};

PeakList pick_peaks(const Psd& psd, const PeakPickOptions& opts = {});

struct Candidate {
    double frequency_hz = 0.0;
    double support = 0.0;  // summed sqrt(p_i p_j) over merged peak pairs
};

/// Positive pairwise differences, merged within `merge_tol_hz` to their
/// power-weighted mean, ascending.
std::vector<Candidate> candidate_shifts(const PeakList& peaks, double merge_tol_hz);

/// Same as candidate_shifts with a one-grid-bin merge tolerance, frequencies only.
std::vector<double> candidate_modulations(const PeakList& peaks);

/// Coherence between the STFT of `signal` and of its copy shifted by `alpha`:
/// per-bin coherences over the `top_fraction` bins with the largest joint
/// energy sqrt(e0 e_alpha), averaged with those energies as weights. Throws on
/// a zero-energy signal.
double spectral_coherence(const AudioBuffer& signal, double alpha, const StftConfig& cfg,
                          double top_fraction = 0.1);

/// Evaluates coherence for many shifts of one recording, reusing the
/// unshifted spectrogram.
class CoherenceAnalyzer {
public:
    CoherenceAnalyzer(const AudioBuffer& signal, const StftConfig& cfg, double top_fraction = 0.1);

    double coherence(double alpha) const;

    /// Maximizes coherence over alpha in [center - half_width, center + half_width].
    /// The search uses a per-frame phase-ramp approximation of the small
    /// residual shift; the returned coherence is exact at the returned shift.
    struct Refined {
        double alpha = 0.0;
        double coherence = 0.0;
    };
    Refined refine(double center, double half_width) const;

private:
    std::vector<Eigen::Index> top_bins(const ComplexSpectrogram& shifted, std::vector<double>& e0,
                                       std::vector<double>& ea) const;

    AudioBuffer signal_;
    StftConfig cfg_;
    double top_fraction_;
    ComplexSpectrogram base_;
    std::vector<double> base_energy_;
};

struct CoherenceReport {
    double candidate = 0.0;  // shift as proposed by the peak differences
    double refined = 0.0;    // shift after refinement (equals candidate when disabled)
    double support = 0.0;    // peak-pair support of the candidate
    double coherence = 0.0;
    bool accepted = false;
};

struct ModsetOptions {
    std::size_t max_peaks = 20;
    double coherence_threshold = 0.3;
    std::size_t max_channels = 5;   // including the zero shift
    std::size_t welch_seg_len = 4096;
    double welch_overlap = 0.5;
    double peak_threshold_db = 10.0;
    std::size_t max_candidates = 24;
    double min_shift_bins = 1.5;    // in STFT bins, rejects shifts inside the window main lobe
    bool refine = true;
    double top_fraction = 0.1;
};

struct ModsetEstimate {
    ModulationSet modset;
    PeakList peaks;
    std::vector<CoherenceReport> reports;
};

/// Peak picking, pairwise differences and coherence pruning; candidates that
/// pass the coherence threshold are kept in order of peak-pair support. Returns {0}
/// when nothing passes or the input is shorter than one Welch segment.
ModsetEstimate estimate_modulation_set(const AudioBuffer& signal, const StftConfig& cfg,
                                       const ModsetOptions& opts = {});

}  // namespace cycmpdr
