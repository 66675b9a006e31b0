#include "cycmpdr/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "cycmpdr/error.hpp"
#include "cycmpdr/random.hpp"
#include "cycmpdr/speech_sim.hpp"

namespace cycmpdr {

namespace fs = std::filesystem;

void write_manifest(std::ostream& os, const std::vector<ManifestEntry>& rows) {
    os.imbue(std::locale::classic());
    os << "id,clean,noise,mixture,f0_hz,snr_db,seed\n";
    for (const auto& r : rows) {
        os << r.id << ',' << r.clean.generic_string() << ',' << r.noise.generic_string() << ','
           << r.mixture.generic_string() << ',' << std::fixed << std::setprecision(6) << r.f0_hz << ',' << r.snr_db
           << ',' << r.seed << '\n';
    }
}

std::vector<ManifestEntry> read_manifest(const fs::path& dataset_dir) {
    std::ifstream is(dataset_dir / kManifestName);
    if (!is) throw Error("manifest: cannot open " + (dataset_dir / kManifestName).string());
    is.imbue(std::locale::classic());
    std::string line;
    if (!std::getline(is, line) || line != "id,clean,noise,mixture,f0_hz,snr_db,seed") {
        throw Error("manifest: unexpected header in " + (dataset_dir / kManifestName).string());
    }
    std::vector<ManifestEntry> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f[7];
        for (auto& field : f) std::getline(ls, field, ',');
        ManifestEntry e;
        e.id = f[0];
        e.clean = f[1];
        e.noise = f[2];
        e.mixture = f[3];
        try {
            e.f0_hz = std::stod(f[4]);
            e.snr_db = std::stod(f[5]);
            e.seed = std::stoull(f[6]);
        } catch (const std::exception&) {
            throw Error("manifest: malformed row '" + line + "'");
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<ManifestEntry> synth_dataset(const SynthConfig& cfg, std::ostream* log) {
    if (cfg.speech_dir.empty() || !fs::is_directory(cfg.speech_dir)) {
        throw Error("synth: speech directory does not exist: " + cfg.speech_dir.string());
    }
    std::vector<fs::path> sources;
    for (const auto& entry : fs::directory_iterator(cfg.speech_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") sources.push_back(entry.path());
    }
    if (sources.empty()) throw Error("synth: no .wav files in " + cfg.speech_dir.string());
    std::sort(sources.begin(), sources.end());
    if (!(cfg.f0_min_hz > 0.0 && cfg.f0_min_hz <= cfg.f0_max_hz)) throw Error("synth: invalid f0 range");
    if (!(cfg.snr_min_db <= cfg.snr_max_db)) throw Error("synth: invalid SNR range");

    fs::create_directories(cfg.out_dir / "clean");
    fs::create_directories(cfg.out_dir / "noise");
    fs::create_directories(cfg.out_dir / "mixture");

    const std::size_t count = cfg.num_files == 0 ? sources.size() : cfg.num_files;
    std::vector<ManifestEntry> rows;
    for (std::size_t i = 0; i < count; ++i) {
        const fs::path& src = sources[i % sources.size()];
        const AudioBuffer speech = read_wav(src);

        ManifestEntry e;
        std::ostringstream id;
        id << "mix_" << std::setw(5) << std::setfill('0') << i;
        e.id = id.str();
        e.seed = mix_seed(cfg.seed, i);
        Rng rng(e.seed);
        e.f0_hz = rng.uniform(cfg.f0_min_hz, cfg.f0_max_hz);
        e.snr_db = rng.uniform(cfg.snr_min_db, cfg.snr_max_db);

        HarmonicNoiseParams np = cfg.noise;
        np.f0_hz = e.f0_hz;
        np.seed = rng.next_u64();
        const AudioBuffer noise = synth_harmonic_cs_noise(speech.duration(), speech.sample_rate, np);
        AudioBuffer clean = speech;
        clean.samples.resize(noise.size(), 0.0);
        Mixture mix = mix_at_snr(clean, noise, {e.snr_db, e.seed});

        // One common gain keeps the stored mixture inside [-1, 1] without changing the SNR.
        double peak = 0.0;
        for (const auto* b : {&clean, &mix.scaled_noise, &mix.mixture}) {
            for (double v : b->samples) peak = std::max(peak, std::abs(v));
        }
        const double gain = peak > 0.99 ? 0.99 / peak : 1.0;
        for (auto* b : {&clean, &mix.scaled_noise, &mix.mixture}) {
            for (double& v : b->samples) v *= gain;
        }

        e.clean = fs::path("clean") / (e.id + ".wav");
        e.noise = fs::path("noise") / (e.id + ".wav");
        e.mixture = fs::path("mixture") / (e.id + ".wav");
        write_wav(cfg.out_dir / e.clean, clean, cfg.encoding);
        write_wav(cfg.out_dir / e.noise, mix.scaled_noise, cfg.encoding);
        write_wav(cfg.out_dir / e.mixture, mix.mixture, cfg.encoding);
        if (log) {
            *log << "synth " << e.id << " source=" << src.filename().string() << " f0=" << e.f0_hz
                 << " snr_db=" << e.snr_db << " seed=" << e.seed << '\n';
        }
        rows.push_back(std::move(e));
    }

    std::ofstream os(cfg.out_dir / kManifestName);
    if (!os) throw Error("synth: cannot write manifest");
    write_manifest(os, rows);
    return rows;
}

void write_speechlike_corpus(const fs::path& dir, std::size_t count, double duration_sec, double sample_rate,
                             std::uint64_t seed) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < count; ++i) {
        std::ostringstream name;
        name << "speech_" << std::setw(3) << std::setfill('0') << i << ".wav";
        write_wav(dir / name.str(), synth_speechlike(duration_sec, sample_rate, mix_seed(seed, i)));
    }
}

EvalResult eval_dataset(const fs::path& dataset_dir, const std::vector<PipelineConfig>& configs,
                        const EvalOptions& opts, std::ostream* log) {
    if (configs.empty()) throw Error("eval: no pipeline configurations");
    const std::vector<ManifestEntry> manifest = read_manifest(dataset_dir);

    struct Slot {
        std::vector<MetricRecord> records;
        std::optional<std::string> skip;
    };
    std::vector<Slot> slots(manifest.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < manifest.size(); i = next++) {
            const ManifestEntry& e = manifest[i];
            Slot& slot = slots[i];
            try {
                const fs::path mix_path = dataset_dir / e.mixture;
                const fs::path clean_path = dataset_dir / e.clean;
                if (!fs::exists(clean_path)) throw Error("missing reference file " + e.clean.generic_string());
                if (!fs::exists(mix_path)) throw Error("missing mixture file " + e.mixture.generic_string());
                const AudioBuffer mixture = read_wav(mix_path);
                const AudioBuffer clean = read_wav(clean_path);
                for (const PipelineConfig& cfg : configs) {
                    const PipelineResult res = run_pipeline(mixture, cfg, &clean, e.f0_hz, opts.with_stoi);
                    slot.records.push_back({e.id, e.snr_db, cfg.preproc_label(), to_string(cfg.mask),
                                            *res.si_sdr_db, res.stoi.value_or(0.0)});
                    if (log) {
                        std::lock_guard lock(log_mutex);
                        *log << "eval " << e.id << ' ' << cfg.preproc_label() << '/' << to_string(cfg.mask)
                             << " modset=" << res.spectral.modset.size() << " si_sdr=" << *res.si_sdr_db << '\n';
                    }
                }
            } catch (const std::exception& ex) {
                slot.records.clear();
                slot.skip = e.id + ": " + ex.what();
            }
        }
    };

    std::size_t workers = opts.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.workers;
    workers = std::min(workers, std::max<std::size_t>(1, manifest.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    EvalResult result;
    std::vector<std::size_t> order(manifest.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return manifest[a].id < manifest[b].id; });
    for (std::size_t i : order) {
        if (slots[i].skip) {
            result.skipped.push_back(*slots[i].skip);
            if (log) *log << "skip " << *slots[i].skip << '\n';
        }
        for (auto& r : slots[i].records) result.records.push_back(std::move(r));
    }
    if (!result.records.empty()) {
        result.table = aggregate(result.records, opts.buckets);
        result.curves = snr_curves(result.records, opts.curve_bin_db);
    }

    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        std::ofstream m(opts.out_dir / "metrics.csv");
        write_metrics_csv(m, result.records);
        std::ofstream a(opts.out_dir / "aggregate.csv");
        write_aggregate_csv(a, result.table);
        std::ofstream c(opts.out_dir / "curves.csv");
        write_curves_csv(c, result.curves);
        std::ofstream s(opts.out_dir / "skipped.log");
        for (const auto& line : result.skipped) s << line << '\n';
        if (!m || !a || !c || !s) throw Error("eval: failed writing results to " + opts.out_dir.string());
    }
    return result;
}

}  // namespace cycmpdr
