// cycmpdr: dataset synthesis, enhancement, batch evaluation and modulation-set
// estimation from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cycmpdr/dataset.hpp"
#include "cycmpdr/error.hpp"
#include "cycmpdr/metrics.hpp"
#include "cycmpdr/pipeline.hpp"
#include "cycmpdr/wav.hpp"

namespace fs = std::filesystem;
using namespace cycmpdr;

namespace {

// Run log: stderr, optionally mirrored to a file.
class RunLog {
public:
    void open(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw Error("cannot open log file " + path);
    }
    void write(const std::string& text) {
        std::cerr << text;
        if (file_) *file_ << text << std::flush;
    }
    std::ostream* file() { return file_.get(); }

private:
    std::unique_ptr<std::ofstream> file_;
};

// Pipeline settings shared by enhance, eval and modset. Precedence: defaults,
// then --config, then --set, then the dedicated flags.
struct PipelineFlags {
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;

    void attach(CLI::App* app, bool with_preproc) {
        app->add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
        app->add_option("--set", sets, "override one setting, KEY=VALUE (repeatable)");
        auto flag = [&](const char* name, const char* key, const char* help) {
            app->add_option_function<std::string>(
                name, [this, key](const std::string& v) { flags.emplace_back(key, v); }, help);
        };
        if (with_preproc) {
            flag("--preproc", "preproc", "id | wiener | cmpdr");
            flag("--mask", "mask", "none | oracle-irm");
        }
        flag("--modset", "modset", "auto | oracle | oracle:N | explicit list such as 0,120,240");
        flag("--beta-x", "beta_x", "covariance smoothing constant");
        flag("--max-channels", "max_channels", "largest modulation set, zero shift included");
        flag("--max-peaks", "max_peaks", "periodogram peaks kept for candidate shifts");
        flag("--coherence-threshold", "coherence_threshold", "minimum coherence of an accepted shift");
        flag("--seed", "seed", "random seed");
    }

    PipelineConfig build() const {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = load_pipeline_config(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw Error("--set expects KEY=VALUE, got '" + s + "'");
            apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        for (const auto& [k, v] : flags) apply_setting(cfg, k, v);
        cfg.validate();
        return cfg;
    }
};

std::string describe(const ModulationSet& m) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << '{';
    for (std::size_t i = 0; i < m.size(); ++i) os << (i ? ", " : "") << m[i];
    os << '}';
    return os.str();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
    SynthConfig cfg;
    bool pcm16 = false;
};

void run_synth(SynthArgs& a, RunLog& log) {
    a.cfg.encoding = a.pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32;
    std::ostringstream head;
    head << "synth: speech_dir=" << a.cfg.speech_dir.string() << " out=" << a.cfg.out_dir.string()
         << " num_files=" << a.cfg.num_files << " seed=" << a.cfg.seed << " f0=[" << a.cfg.f0_min_hz << ","
         << a.cfg.f0_max_hz << "] snr=[" << a.cfg.snr_min_db << "," << a.cfg.snr_max_db
         << "] harmonics=" << a.cfg.noise.num_harmonics << " correlation=" << a.cfg.noise.correlation
         << " envelope_rate_hz=" << a.cfg.noise.envelope_rate_hz << " amplitude_decay=" << a.cfg.noise.amplitude_decay
         << " encoding=" << (a.pcm16 ? "pcm16" : "float32") << '\n';
    log.write(head.str());
    std::ostringstream details;
    const auto rows = synth_dataset(a.cfg, &details);
    log.write(details.str());
    log.write(fmt("synth: wrote %zu mixtures\n", rows.size()));
}

// --- enhance -----------------------------------------------------------------

struct EnhanceArgs {
    PipelineFlags pipeline;
    std::string input, output, reference, diagnostics;
    std::optional<double> f0;
    bool pcm16 = false;
    bool no_stoi = false;
};

void run_enhance(EnhanceArgs& a, RunLog& log) {
    const PipelineConfig cfg = a.pipeline.build();
    log.write("enhance: configuration\n" + dump_config(cfg));

    AudioBuffer mixture = read_wav(a.input);
    std::optional<AudioBuffer> clean;
    if (!a.reference.empty()) clean = read_wav(a.reference);

    CmpdrDiagnostics diag;
    const bool want_diag = !a.diagnostics.empty();
    if (want_diag && cfg.preproc != Preproc::Cmpdr) throw Error("--diagnostics needs preproc=cmpdr");
    const auto res = run_pipeline(mixture, cfg, clean ? &*clean : nullptr, a.f0, !a.no_stoi, want_diag ? &diag : nullptr);

    if (cfg.preproc == Preproc::Cmpdr) {
        log.write("enhance: modulation set " + describe(res.spectral.modset) + "\n");
        log.write(fmt("enhance: %zu weight solves, %zu pass-through\n", res.spectral.stats.solved,
                      res.spectral.stats.passthrough));
    }
    const std::size_t clipped = write_wav(a.output, res.enhanced, a.pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32);
    if (clipped) log.write(fmt("enhance: warning: %zu samples clipped\n", clipped));
    if (want_diag) {
        write_diagnostics(a.diagnostics, diag);
        log.write("enhance: diagnostics written to " + a.diagnostics + "\n");
    }
    if (res.si_sdr_db) {
        log.write(fmt("enhance: SI-SDR input %.3f dB, output %.3f dB\n", *res.input_si_sdr_db, *res.si_sdr_db));
        if (res.stoi) log.write(fmt("enhance: STOI %.4f\n", *res.stoi));
        MetricRecord rec{fs::path(a.input).stem().string(), *res.input_si_sdr_db, cfg.preproc_label(), to_string(cfg.mask),
                         *res.si_sdr_db, res.stoi.value_or(0.0)};
        write_metrics_csv(std::cout, {rec});
    }
}

// --- eval --------------------------------------------------------------------

struct EvalArgs {
    PipelineFlags pipeline;
    std::string dataset, out;
    std::vector<std::string> preprocs{"id", "wiener", "cmpdr"};
    std::vector<std::string> masks{"none", "oracle-irm"};
    std::size_t workers = 0;
    bool no_stoi = false;
};

void run_eval(EvalArgs& a, RunLog& log) {
    const PipelineConfig base = a.pipeline.build();
    log.write("eval: base configuration\n" + dump_config(base));
    std::vector<PipelineConfig> configs;
    for (const auto& p : a.preprocs) {
        for (const auto& m : a.masks) {
            PipelineConfig c = base;
            c.preproc = parse_preproc(p);
            c.mask = parse_mask(m);
            configs.push_back(c);
        }
    }
    EvalOptions opts;
    opts.out_dir = a.out;
    opts.workers = a.workers;
    opts.with_stoi = !a.no_stoi;
    std::ostringstream details;
    const auto res = eval_dataset(a.dataset, configs, opts, &details);
    log.write(details.str());
    for (const auto& s : res.skipped) log.write("eval: skipped " + s + "\n");
    std::ostringstream table;
    write_aggregate_csv(table, res.table);
    log.write(fmt("eval: %zu records, %zu skipped\n", res.records.size(), res.skipped.size()));
    std::cout << table.str();
}

// --- modset ------------------------------------------------------------------

struct ModsetArgs {
    PipelineFlags pipeline;
    std::string input;
};

void run_modset(ModsetArgs& a, RunLog& log) {
    PipelineConfig cfg = a.pipeline.build();
    log.write("modset: configuration\n" + dump_config(cfg));
    const AudioBuffer x = read_wav(a.input);
    if (x.sample_rate != cfg.sample_rate) throw Error("input sample rate differs from the configured rate");
    const auto est = estimate_modulation_set(x, cfg.stft_config(), cfg.estimation);
    std::cout << "peaks_hz";
    for (double f : est.peaks.frequencies) std::cout << ' ' << fmt("%.2f", f);
    std::cout << "\ncandidate_hz,refined_hz,support,coherence,accepted\n";
    for (const auto& r : est.reports) {
        std::cout << fmt("%.3f,%.3f,%.6g,%.4f,%d\n", r.candidate, r.refined, r.support, r.coherence, r.accepted ? 1 : 0);
    }
    std::cout << "modset " << describe(est.modset) << '\n';
}

// --- speechlike ----------------------------------------------------------------

struct SpeechArgs {
    std::string out;
    std::size_t count = 10;
    double duration = 6.0;
    double sample_rate = 16000.0;
    std::uint64_t seed = 0;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cyclic MPDR speech enhancement toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_path;
    app.add_option("--log", log_path, "also write the run log to this file");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "mix clean speech with random-harmonic cyclostationary noise");
    s->add_option("--speech-dir", synth.cfg.speech_dir, "directory of clean mono WAV files")->required();
    s->add_option("--out", synth.cfg.out_dir, "output dataset directory")->required();
    s->add_option("--num-files", synth.cfg.num_files, "mixtures to write (0: one per clean file)");
    s->add_option("--seed", synth.cfg.seed, "dataset seed");
    s->add_option("--f0-min", synth.cfg.f0_min_hz, "lowest noise fundamental in Hz");
    s->add_option("--f0-max", synth.cfg.f0_max_hz, "highest noise fundamental in Hz");
    s->add_option("--snr-min", synth.cfg.snr_min_db, "lowest mixture SNR in dB");
    s->add_option("--snr-max", synth.cfg.snr_max_db, "highest mixture SNR in dB");
    s->add_option("--harmonics", synth.cfg.noise.num_harmonics, "harmonics per noise signal");
    s->add_option("--correlation", synth.cfg.noise.correlation, "inter-harmonic envelope correlation")
        ->check(CLI::Range(0.0, 1.0));
    s->add_option("--envelope-rate", synth.cfg.noise.envelope_rate_hz, "envelope bandwidth in Hz");
    s->add_option("--amplitude-decay", synth.cfg.noise.amplitude_decay, "harmonic p gets amplitude p^-decay");
    s->add_flag("--rectify-envelopes", synth.cfg.noise.rectify_envelopes, "use |envelope| instead of the signed envelope");
    s->add_flag("--pcm16", synth.pcm16, "write PCM16 instead of float32");

    EnhanceArgs enh;
    auto* e = app.add_subcommand("enhance", "enhance one recording");
    e->add_option("--input", enh.input, "noisy mono WAV")->required()->check(CLI::ExistingFile);
    e->add_option("--output", enh.output, "enhanced WAV")->required();
    e->add_option("--reference", enh.reference, "clean reference: enables metrics and the oracle mask")
        ->check(CLI::ExistingFile);
    e->add_option("--f0", enh.f0, "noise fundamental for --modset oracle");
    e->add_option("--diagnostics", enh.diagnostics, "write per-bin covariance and weight trajectories here");
    e->add_flag("--pcm16", enh.pcm16, "write PCM16 instead of float32");
    e->add_flag("--no-stoi", enh.no_stoi, "skip STOI");
    enh.pipeline.attach(e, true);

    EvalArgs ev;
    auto* v = app.add_subcommand("eval", "evaluate preprocessor x mask combinations on a dataset");
    v->add_option("--dataset", ev.dataset, "directory written by synth")->required()->check(CLI::ExistingDirectory);
    v->add_option("--out", ev.out, "output directory for metrics.csv, aggregate.csv, curves.csv")->required();
    v->add_option("--preprocs", ev.preprocs, "preprocessors to run")->delimiter(',');
    v->add_option("--masks", ev.masks, "masks to run")->delimiter(',');
    v->add_option("--workers", ev.workers, "worker threads (0: all cores)");
    v->add_flag("--no-stoi", ev.no_stoi, "skip STOI");
    ev.pipeline.attach(v, false);

    ModsetArgs ms;
    auto* m = app.add_subcommand("modset", "estimate and print the modulation set of a recording");
    m->add_option("--input", ms.input, "mono WAV")->required()->check(CLI::ExistingFile);
    ms.pipeline.attach(m, false);

    SpeechArgs sp;
    auto* g = app.add_subcommand("speechlike", "write synthetic speech-like clean files");
    g->add_option("--out", sp.out, "output directory")->required();
    g->add_option("--count", sp.count, "number of files");
    g->add_option("--duration", sp.duration, "seconds per file");
    g->add_option("--sample-rate", sp.sample_rate, "sample rate in Hz");
    g->add_option("--seed", sp.seed, "seed");

    CLI11_PARSE(app, argc, argv);

    RunLog log;
    std::string stage = app.get_subcommands().front()->get_name();
    try {
        log.open(log_path);
        if (*s) run_synth(synth, log);
        else if (*e) run_enhance(enh, log);
        else if (*v) run_eval(ev, log);
        else if (*m) run_modset(ms, log);
        else if (*g) {
            write_speechlike_corpus(sp.out, sp.count, sp.duration, sp.sample_rate, sp.seed);
            log.write(fmt("speechlike: wrote %zu files to %s\n", sp.count, sp.out.c_str()));
        }
    } catch (const StageError& err) {
        log.write(std::string("error: ") + err.what() + "\n");
        return 2;
    } catch (const std::exception& err) {
        log.write("error: [" + stage + "] " + err.what() + "\n");
        return 1;
    }
    return 0;
}
