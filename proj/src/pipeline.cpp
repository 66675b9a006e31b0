#include "cycmpdr/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>

#include "cycmpdr/error.hpp"
#include "cycmpdr/metrics.hpp"

namespace cycmpdr {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw Error("config: " + key + " expects a number, got '" + v + "'");
    return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
    std::size_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw Error("config: " + key + " expects a non-negative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error("config: " + key + " expects true/false, got '" + v + "'");
}

std::string number(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

std::string to_string(Preproc p) {
    switch (p) {
        case Preproc::Identity: return "id";
        case Preproc::Wiener: return "wiener";
        case Preproc::Cmpdr: return "cmpdr";
    }
    return "?";
}

std::string to_string(MaskKind m) { return m == MaskKind::None ? "none" : "oracle-irm"; }

Preproc parse_preproc(std::string_view s) {
    if (s == "id" || s == "identity") return Preproc::Identity;
    if (s == "wiener") return Preproc::Wiener;
    if (s == "cmpdr") return Preproc::Cmpdr;
    throw Error("unknown preprocessor '" + std::string(s) + "' (expected id, wiener or cmpdr)");
}

MaskKind parse_mask(std::string_view s) {
    if (s == "none") return MaskKind::None;
    if (s == "oracle-irm" || s == "irm") return MaskKind::OracleIrm;
    throw Error("unknown mask '" + std::string(s) + "' (expected none or oracle-irm)");
}

ModsetChoice ModsetChoice::parse(std::string_view text) {
    const std::string t = trim(text);
    ModsetChoice c;
    if (t == "auto") return c;
    if (t == "oracle" || t.starts_with("oracle:")) {
        c.mode = Mode::OracleHarmonics;
        if (t.size() > 7) c.harmonics = to_size("modset", t.substr(7));
        if (c.harmonics == 0) throw Error("modset: oracle needs at least one harmonic");
        return c;
    }
    c.mode = Mode::Fixed;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) c.shifts.push_back(to_double("modset", trim(item)));
    ModulationSet validated(c.shifts);  // throws on a malformed list
    return c;
}

std::string ModsetChoice::to_string() const {
    switch (mode) {
        case Mode::Estimate: return "auto";
        case Mode::OracleHarmonics: return "oracle:" + std::to_string(harmonics);
        case Mode::Fixed: {
            std::string s;
            for (std::size_t i = 0; i < shifts.size(); ++i) s += (i ? "," : "") + number(shifts[i]);
            return s;
        }
    }
    return "?";
}

StftConfig PipelineConfig::stft_config() const { return StftConfig::sqrt_hann(sample_rate, frame_ms, hop_ms, fft_size); }

std::string PipelineConfig::preproc_label() const { return label.empty() ? to_string(preproc) : label; }

void PipelineConfig::validate() const {
    stft_config().validate();
    if (!(cmpdr.beta > 0.0 && cmpdr.beta < 1.0)) throw Error("config: beta_x must lie in (0, 1)");
    if (cmpdr.loading < 0.0) throw Error("config: loading must be non-negative");
    if (cmpdr.weight_stride == 0) throw Error("config: weight_stride must be positive");
    if (estimation.max_channels == 0 || estimation.max_channels > static_cast<std::size_t>(kMaxChannels)) {
        throw Error("config: max_channels must lie in [1, " + std::to_string(kMaxChannels) + "]");
    }
    if (estimation.max_peaks == 0) throw Error("config: max_peaks must be positive");
    if (!(estimation.coherence_threshold >= 0.0 && estimation.coherence_threshold <= 1.0)) {
        throw Error("config: coherence_threshold must lie in [0, 1]");
    }
    if (!(min_stats.gain_floor > 0.0 && min_stats.gain_floor < 1.0)) throw Error("config: gain_floor must lie in (0, 1)");
    if (!(min_stats.smooth_alpha >= 0.0 && min_stats.smooth_alpha < 1.0)) throw Error("config: smooth_alpha must lie in [0, 1)");
    if (!(min_stats.window_sec > 0.0) || !(min_stats.bias > 0.0)) throw Error("config: min-stats window and bias must be positive");
}

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "sample_rate") cfg.sample_rate = to_double(key, v);
    else if (key == "frame_ms") cfg.frame_ms = to_double(key, v);
    else if (key == "hop_ms") cfg.hop_ms = to_double(key, v);
    else if (key == "fft_size") cfg.fft_size = to_size(key, v);
    else if (key == "preproc") cfg.preproc = parse_preproc(v);
    else if (key == "mask") cfg.mask = parse_mask(v);
    else if (key == "modset") cfg.modset = ModsetChoice::parse(v);
    else if (key == "beta_x") cfg.cmpdr.beta = to_double(key, v);
    else if (key == "loading") cfg.cmpdr.loading = to_double(key, v);
    else if (key == "init_scale") cfg.cmpdr.init_scale = to_double(key, v);
    else if (key == "init_frames") cfg.cmpdr.init_frames = to_size(key, v);
    else if (key == "weight_stride") cfg.cmpdr.weight_stride = to_size(key, v);
    else if (key == "max_peaks") cfg.estimation.max_peaks = to_size(key, v);
    else if (key == "coherence_threshold") cfg.estimation.coherence_threshold = to_double(key, v);
    else if (key == "max_channels") cfg.estimation.max_channels = to_size(key, v);
    else if (key == "welch_seg_len") cfg.estimation.welch_seg_len = to_size(key, v);
    else if (key == "welch_overlap") cfg.estimation.welch_overlap = to_double(key, v);
    else if (key == "peak_threshold_db") cfg.estimation.peak_threshold_db = to_double(key, v);
    else if (key == "max_candidates") cfg.estimation.max_candidates = to_size(key, v);
    else if (key == "min_shift_bins") cfg.estimation.min_shift_bins = to_double(key, v);
    else if (key == "refine") cfg.estimation.refine = to_bool(key, v);
    else if (key == "top_fraction") cfg.estimation.top_fraction = to_double(key, v);
    else if (key == "min_stats_window_sec") cfg.min_stats.window_sec = to_double(key, v);
    else if (key == "smooth_alpha") cfg.min_stats.smooth_alpha = to_double(key, v);
    else if (key == "bias") cfg.min_stats.bias = to_double(key, v);
    else if (key == "gain_floor") cfg.min_stats.gain_floor = to_double(key, v);
    else if (key == "seed") cfg.seed = to_size(key, v);
    else if (key == "label") cfg.label = v;
    else throw Error("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("config: cannot open " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw Error("config: " + path.string() + ":" + std::to_string(lineno) + " is not key=value");
        out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return out;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base) {
    for (const auto& [k, v] : read_key_values(path)) apply_setting(base, k, v);
    base.validate();
    return base;
}

std::string dump_config(const PipelineConfig& c) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    auto kv = [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
    kv("sample_rate", number(c.sample_rate));
    kv("frame_ms", number(c.frame_ms));
    kv("hop_ms", number(c.hop_ms));
    kv("fft_size", std::to_string(c.fft_size));
    kv("preproc", to_string(c.preproc));
    kv("mask", to_string(c.mask));
    kv("modset", c.modset.to_string());
    kv("beta_x", number(c.cmpdr.beta));
    kv("loading", number(c.cmpdr.loading));
    kv("init_scale", number(c.cmpdr.init_scale));
    kv("init_frames", std::to_string(c.cmpdr.init_frames));
    kv("weight_stride", std::to_string(c.cmpdr.weight_stride));
    kv("max_peaks", std::to_string(c.estimation.max_peaks));
    kv("coherence_threshold", number(c.estimation.coherence_threshold));
    kv("max_channels", std::to_string(c.estimation.max_channels));
    kv("welch_seg_len", std::to_string(c.estimation.welch_seg_len));
    kv("welch_overlap", number(c.estimation.welch_overlap));
    kv("peak_threshold_db", number(c.estimation.peak_threshold_db));
    kv("max_candidates", std::to_string(c.estimation.max_candidates));
    kv("min_shift_bins", number(c.estimation.min_shift_bins));
    kv("refine", c.estimation.refine ? "true" : "false");
    kv("top_fraction", number(c.estimation.top_fraction));
    kv("min_stats_window_sec", number(c.min_stats.window_sec));
    kv("smooth_alpha", number(c.min_stats.smooth_alpha));
    kv("bias", number(c.min_stats.bias));
    kv("gain_floor", number(c.min_stats.gain_floor));
    kv("seed", std::to_string(c.seed));
    if (!c.label.empty()) kv("label", c.label);
    return os.str();
}

ModulationSet select_modulation_set(const AudioBuffer& mixture, const PipelineConfig& cfg,
                                    std::optional<double> oracle_f0, std::optional<ModsetEstimate>* estimate) {
    try {
        switch (cfg.modset.mode) {
            case ModsetChoice::Mode::Fixed: return ModulationSet(cfg.modset.shifts);
            case ModsetChoice::Mode::OracleHarmonics:
                if (!oracle_f0) throw Error("oracle modulation set requested but no f0 is known for this input");
                return ModulationSet::harmonic(*oracle_f0, cfg.modset.harmonics);
            case ModsetChoice::Mode::Estimate: {
                ModsetEstimate est = estimate_modulation_set(mixture, cfg.stft_config(), cfg.estimation);
                ModulationSet m = est.modset;
                if (estimate) *estimate = std::move(est);
                return m;
            }
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError("modset", e.what());
    }
    throw StageError("modset", "unreachable");
}

SpectralResult run_spectral(const AudioBuffer& mixture, const PipelineConfig& cfg, const AudioBuffer* clean,
                            std::optional<double> oracle_f0, CmpdrDiagnostics* diagnostics) {
    SpectralResult r;
    StftConfig stft_cfg;
    try {
        cfg.validate();
        stft_cfg = cfg.stft_config();
        if (mixture.sample_rate != cfg.sample_rate) throw Error("input sample rate differs from the configured rate");
        if (clean && (clean->size() != mixture.size() || clean->sample_rate != mixture.sample_rate)) {
            throw Error("reference and mixture differ in length or rate");
        }
    } catch (const std::exception& e) {
        throw StageError("config", e.what());
    }

    if (cfg.preproc == Preproc::Cmpdr) {
        r.modset = select_modulation_set(mixture, cfg, oracle_f0, &r.estimate);
        try {
            const AugmentedSpectrogram aug = build_augmented(mixture, r.modset, stft_cfg);
            std::vector<AugmentedSpectrogram> comps;
            if (clean) comps.push_back(build_augmented(*clean, r.modset, stft_cfg));
            CmpdrResult out = process(aug, cfg.cmpdr, comps, {}, diagnostics);
            r.preprocessed = std::move(out.output);
            r.stats = out.stats;
            if (clean) r.clean_preprocessed = std::move(out.companions.front());
        } catch (const std::exception& e) {
            throw StageError("cmpdr", e.what());
        }
    } else {
        try {
            const ComplexSpectrogram x = stft(mixture, stft_cfg);
            if (cfg.preproc == Preproc::Identity) {
                r.preprocessed = identity_preproc(x);
                if (clean) r.clean_preprocessed = stft(*clean, stft_cfg);
            } else {
                const auto& ms = cfg.min_stats;
                const NoisePsdEstimate noise = min_stats_noise_psd(x, ms.window_sec, ms.smooth_alpha, ms.bias);
                const RealMask gain = wiener_gain(x, noise, ms.gain_floor);
                r.preprocessed = apply_mask(x, gain);
                if (clean) r.clean_preprocessed = apply_mask(stft(*clean, stft_cfg), gain);
            }
        } catch (const std::exception& e) {
            throw StageError(cfg.preproc == Preproc::Identity ? "id" : "wiener", e.what());
        }
    }

    try {
        if (cfg.mask == MaskKind::None) {
            r.output = r.preprocessed;
        } else {
            if (!r.clean_preprocessed) throw Error("the oracle mask needs a clean reference");
            ComplexSpectrogram residual = r.preprocessed;
            residual.data -= r.clean_preprocessed->data;
            r.output = apply_mask(r.preprocessed, oracle_irm(*r.clean_preprocessed, residual));
        }
    } catch (const std::exception& e) {
        throw StageError("mask", e.what());
    }
    return r;
}

PipelineResult run_pipeline(const AudioBuffer& mixture, const PipelineConfig& cfg, const AudioBuffer* clean,
                            std::optional<double> oracle_f0, bool with_stoi, CmpdrDiagnostics* diagnostics) {
    PipelineResult res;
    res.spectral = run_spectral(mixture, cfg, clean, oracle_f0, diagnostics);
    try {
        res.enhanced = real_part(istft(res.spectral.output));
    } catch (const std::exception& e) {
        throw StageError("istft", e.what());
    }
    if (clean) {
        try {
            res.input_si_sdr_db = si_sdr(mixture, *clean);
            res.si_sdr_db = si_sdr(res.enhanced, *clean);
            if (with_stoi) res.stoi = stoi(res.enhanced, *clean);
        } catch (const std::exception& e) {
            throw StageError("metrics", e.what());
        }
    }
    return res;
}

}  // namespace cycmpdr
