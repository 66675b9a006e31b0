#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cycmpdr/baselines.hpp"
#include "cycmpdr/cmpdr.hpp"
#include "cycmpdr/cyclic_estimation.hpp"
#include "cycmpdr/modulation.hpp"
#include "cycmpdr/stft.hpp"

namespace cycmpdr {

enum class Preproc { Identity, Wiener, Cmpdr };
enum class MaskKind { None, OracleIrm };

std::string to_string(Preproc p);
std::string to_string(MaskKind m);
Preproc parse_preproc(std::string_view s);
MaskKind parse_mask(std::string_view s);

/// How the cMPDR obtains its modulation set: estimated from the recording
/// ("auto"), harmonics of a known fundamental ("oracle" / "oracle:N" for
/// {0, f0, ..., N f0}), or a fixed list ("0,120,240").
struct ModsetChoice {
    enum class Mode { Estimate, OracleHarmonics, Fixed };
    Mode mode = Mode::Estimate;
    std::size_t harmonics = 2;
    std::vector<double> shifts;

    static ModsetChoice parse(std::string_view text);
    std::string to_string() const;
};

struct PipelineConfig {
    double sample_rate = 16000.0;
    double frame_ms = 32.0;
    double hop_ms = 8.0;
    std::size_t fft_size = 512;

    Preproc preproc = Preproc::Cmpdr;
    MaskKind mask = MaskKind::None;
    ModsetChoice modset;
    CmpdrParams cmpdr;
    ModsetOptions estimation;
    MinStatsParams min_stats;
    std::uint64_t seed = 0;
    std::string label;  // overrides the preprocessor name in reports when set

    StftConfig stft_config() const;
    std::string preproc_label() const;
    void validate() const;
};

/// Applies one `key=value` setting; throws on unknown keys or bad values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);
/// Flat key=value file; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base = {});
/// Every setting as key=value lines, in a fixed order.
std::string dump_config(const PipelineConfig& cfg);

/// Spectrogram-level result of one run.
struct SpectralResult {
    ModulationSet modset;
    std::optional<ModsetEstimate> estimate;
    ComplexSpectrogram preprocessed;                 // Y
    std::optional<ComplexSpectrogram> clean_preprocessed;
    ComplexSpectrogram output;                       // M (.) Y, or Y without a mask
    CmpdrStats stats;
};

struct PipelineResult {
    AudioBuffer enhanced;
    SpectralResult spectral;
    std::optional<double> input_si_sdr_db;
    std::optional<double> si_sdr_db;
    std::optional<double> stoi;
};

/// Modulation-set selection as configured. Throws StageError("modset").
ModulationSet select_modulation_set(const AudioBuffer& mixture, const PipelineConfig& cfg,
                                    std::optional<double> oracle_f0, std::optional<ModsetEstimate>* estimate = nullptr);

/// Preprocessor and mask on the STFT grid. `clean`, when given, is passed
/// through the same linear operator (needed by the oracle mask).
/// `diagnostics` is filled by the cMPDR preprocessor only.
SpectralResult run_spectral(const AudioBuffer& mixture, const PipelineConfig& cfg, const AudioBuffer* clean = nullptr,
                            std::optional<double> oracle_f0 = std::nullopt, CmpdrDiagnostics* diagnostics = nullptr);

/// Full two-stage enhancement; metrics are filled in when `clean` is given.
PipelineResult run_pipeline(const AudioBuffer& mixture, const PipelineConfig& cfg, const AudioBuffer* clean = nullptr,
                            std::optional<double> oracle_f0 = std::nullopt, bool with_stoi = true,
                            CmpdrDiagnostics* diagnostics = nullptr);

}  // namespace cycmpdr
