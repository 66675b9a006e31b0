#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cycmpdr/metrics.hpp"
#include "cycmpdr/noise_synth.hpp"
#include "cycmpdr/pipeline.hpp"
#include "cycmpdr/wav.hpp"

namespace cycmpdr {

struct SynthConfig {
    std::filesystem::path speech_dir;
    std::filesystem::path out_dir;
    std::size_t num_files = 0;  // 0: one mixture per clean file
    double f0_min_hz = 60.0;
    double f0_max_hz = 150.0;
    double snr_min_db = -20.0;
    double snr_max_db = 0.0;
    HarmonicNoiseParams noise;  // f0 and seed are drawn per file
    std::uint64_t seed = 0;
    WavEncoding encoding = WavEncoding::Float32;
};

/// One row of manifest.csv. Paths are relative to the dataset directory.
struct ManifestEntry {
    std::string id;
    std::filesystem::path clean;
    std::filesystem::path noise;
    std::filesystem::path mixture;
    double f0_hz = 0.0;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
};

inline constexpr const char* kManifestName = "manifest.csv";

void write_manifest(std::ostream& os, const std::vector<ManifestEntry>& rows);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dataset_dir);

/// Mixes every clean file (cycled when num_files exceeds the count) with
/// harmonic noise at a random f0 and SNR; writes clean/noise/mixture WAVs and
/// the manifest.
std::vector<ManifestEntry> synth_dataset(const SynthConfig& cfg, std::ostream* log = nullptr);

/// Writes `count` speech-like clean files into `dir` (speech_000.wav, ...).
void write_speechlike_corpus(const std::filesystem::path& dir, std::size_t count, double duration_sec,
                             double sample_rate, std::uint64_t seed);

struct EvalOptions {
    std::filesystem::path out_dir;  // empty: nothing written
    std::vector<SnrBucket> buckets = default_buckets();
    double curve_bin_db = 2.0;
    std::size_t workers = 0;        // 0: hardware concurrency
    bool with_stoi = true;
};

struct EvalResult {
    std::vector<MetricRecord> records;  // sorted by file, then config order
    std::vector<std::string> skipped;   // "id: reason"
    std::vector<AggregateRow> table;
    std::vector<CurvePoint> curves;
};

/// Runs every config on every manifest entry. Writes metrics.csv,
/// aggregate.csv, curves.csv and skipped.log into `opts.out_dir`.
EvalResult eval_dataset(const std::filesystem::path& dataset_dir, const std::vector<PipelineConfig>& configs,
                        const EvalOptions& opts = {}, std::ostream* log = nullptr);

}  // namespace cycmpdr
