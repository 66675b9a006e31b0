#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cycmpdr/audio.hpp"

namespace cycmpdr {

inline constexpr double kSiSdrCapDb = 100.0;

/// Scale-invariant SDR in dB, clamped to +-100 dB.
double si_sdr(std::span<const double> estimate, std::span<const double> reference);
double si_sdr(const AudioBuffer& estimate, const AudioBuffer& reference);

/// Short-time objective intelligibility (original, non-extended variant).
/// Inputs are resampled to 10 kHz internally; at least 384 ms required.
double stoi(const AudioBuffer& estimate, const AudioBuffer& reference);

/// Polyphase resampling by up/down with a Kaiser-windowed sinc filter.
std::vector<double> resample_poly(std::span<const double> x, int up, int down);

struct MetricRecord {
    std::string file;
    double input_snr_db = 0.0;
    std::string preproc;
    std::string mask;
    double si_sdr_db = 0.0;
    double stoi = 0.0;
};

/// Input-SNR range [lo, hi), or [lo, hi] when `closed` is set.
struct SnrBucket {
    double lo = 0.0;
    double hi = 0.0;
    bool closed = false;

    bool contains(double snr) const noexcept { return snr >= lo && (closed ? snr <= hi : snr < hi); }
    std::string label() const;
};

/// [-20, -10) and [-10, 0].
std::vector<SnrBucket> default_buckets();

struct AggregateRow {
    std::string bucket;  // bucket label or "other"
    std::string preproc;
    std::string mask;
    std::size_t count = 0;
    double mean_input_snr_db = 0.0;
    double mean_si_sdr_db = 0.0;
    double mean_stoi = 0.0;
};

/// Mean metrics per bucket x preprocessor x mask. Rows follow bucket order,
/// then preprocessor and mask names; out-of-bucket records land in "other".
std::vector<AggregateRow> aggregate(const std::vector<MetricRecord>& records, const std::vector<SnrBucket>& buckets);

struct CurvePoint {
    std::string preproc;
    std::string mask;
    double snr_center_db = 0.0;
    std::size_t count = 0;
    double mean_si_sdr_db = 0.0;
    double mean_stoi = 0.0;
};

/// Metric means in input-SNR bins of `bin_width_db` (centers at multiples of the width).
std::vector<CurvePoint> snr_curves(const std::vector<MetricRecord>& records, double bin_width_db = 2.0);

void write_metrics_csv(std::ostream& os, const std::vector<MetricRecord>& records);
std::vector<MetricRecord> read_metrics_csv(std::istream& is);
void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void write_curves_csv(std::ostream& os, const std::vector<CurvePoint>& points);

}  // namespace cycmpdr
