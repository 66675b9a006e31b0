// Python bindings: waveforms cross as 1-D numpy arrays, spectrograms as
// (bins, frames) complex arrays.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>

#include "cycmpdr/baselines.hpp"
#include "cycmpdr/cmpdr.hpp"
#include "cycmpdr/cyclic_estimation.hpp"
#include "cycmpdr/dataset.hpp"
#include "cycmpdr/error.hpp"
#include "cycmpdr/metrics.hpp"
#include "cycmpdr/modulation.hpp"
#include "cycmpdr/noise_synth.hpp"
#include "cycmpdr/pipeline.hpp"
#include "cycmpdr/speech_sim.hpp"
#include "cycmpdr/stft.hpp"
#include "cycmpdr/wav.hpp"

namespace py = pybind11;
using namespace cycmpdr;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

AudioBuffer to_audio(const RealArray& x, double fs) {
    if (x.ndim() != 1) throw Error("expected a 1-D waveform");
    AudioBuffer a;
    a.sample_rate = fs;
    a.samples.assign(x.data(), x.data() + x.size());
    return a;
}

py::array_t<double> to_numpy(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

PipelineConfig make_config(double fs, const std::map<std::string, std::string>& settings) {
    PipelineConfig cfg;
    cfg.sample_rate = fs;
    for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cyclic MPDR speech enhancement";
    py::register_exception<Error>(m, "CycmpdrError", PyExc_RuntimeError);

    py::class_<StftConfig>(m, "StftConfig")
        .def(py::init([](double fs, double frame_ms, double hop_ms, std::size_t fft_size) {
                 return StftConfig::sqrt_hann(fs, frame_ms, hop_ms, fft_size);
             }),
             py::arg("sample_rate") = 16000.0, py::arg("frame_ms") = 32.0, py::arg("hop_ms") = 8.0,
             py::arg("fft_size") = 0)
        .def_readonly("frame_len", &StftConfig::frame_len)
        .def_readonly("hop", &StftConfig::hop)
        .def_readonly("fft_size", &StftConfig::fft_size)
        .def_readonly("sample_rate", &StftConfig::sample_rate)
        .def_property_readonly("window", [](const StftConfig& c) { return to_numpy(c.window); });

    m.def("stft", [](const RealArray& x, const StftConfig& cfg) { return stft(to_audio(x, cfg.sample_rate), cfg).data; },
          py::arg("x"), py::arg("config"), "Two-sided STFT, shape (fft_size, frames).");
    m.def(
        "istft",
        [](const Eigen::MatrixXcd& spec, const StftConfig& cfg, std::size_t length) {
            ComplexSpectrogram s{spec, cfg, length};
            if (static_cast<std::size_t>(spec.rows()) != cfg.fft_size || cfg.num_frames(length) != static_cast<std::size_t>(spec.cols())) {
                throw Error("istft: spectrogram shape does not match config and length");
            }
            const ComplexBuffer y = istft(s);
            return py::array_t<cplx>(y.size(), y.samples.data());
        },
        py::arg("spec"), py::arg("config"), py::arg("length"));
    m.def(
        "modulate",
        [](const RealArray& x, double alpha, double fs) {
            const ComplexBuffer y = modulate(to_audio(x, fs), alpha);
            return py::array_t<cplx>(y.size(), y.samples.data());
        },
        py::arg("x"), py::arg("alpha"), py::arg("sample_rate") = 16000.0);

    m.def(
        "spectral_coherence",
        [](const RealArray& x, double alpha, double fs) {
            return spectral_coherence(to_audio(x, fs), alpha, StftConfig::sqrt_hann(fs));
        },
        py::arg("x"), py::arg("alpha"), py::arg("sample_rate") = 16000.0);
    m.def(
        "estimate_modulation_set",
        [](const RealArray& x, double fs, std::size_t max_channels, double coherence_threshold) {
            ModsetOptions o;
            o.max_channels = max_channels;
            o.coherence_threshold = coherence_threshold;
            const auto est = estimate_modulation_set(to_audio(x, fs), StftConfig::sqrt_hann(fs), o);
            return est.modset.shifts();
        },
        py::arg("x"), py::arg("sample_rate") = 16000.0, py::arg("max_channels") = 5,
        py::arg("coherence_threshold") = 0.3, "Estimated shifts in Hz, zero first.");

    m.def(
        "enhance",
        [](const RealArray& x, double fs, std::optional<RealArray> clean, std::optional<double> f0,
           const std::map<std::string, std::string>& settings) {
            const PipelineConfig cfg = make_config(fs, settings);
            std::optional<AudioBuffer> ref;
            if (clean) ref = to_audio(*clean, fs);
            PipelineResult r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(to_audio(x, fs), cfg, ref ? &*ref : nullptr, f0, ref.has_value());
            }
            py::dict out;
            out["enhanced"] = to_numpy(r.enhanced.samples);
            out["modset"] = r.spectral.modset.shifts();
            out["si_sdr"] = r.si_sdr_db;
            out["input_si_sdr"] = r.input_si_sdr_db;
            out["stoi"] = r.stoi;
            return out;
        },
        py::arg("x"), py::arg("sample_rate") = 16000.0, py::arg("clean") = py::none(), py::arg("f0") = py::none(),
        py::arg("settings") = std::map<std::string, std::string>{},
        "Two-stage enhancement. `settings` takes the same keys as the CLI config file.");
    m.def(
        "wiener",
        [](const RealArray& x, double fs) {
            const PipelineConfig cfg = make_config(fs, {{"preproc", "wiener"}});
            return to_numpy(run_pipeline(to_audio(x, fs), cfg).enhanced.samples);
        },
        py::arg("x"), py::arg("sample_rate") = 16000.0);

    m.def("si_sdr", [](const RealArray& est, const RealArray& ref) { return si_sdr(to_audio(est, 1).samples, to_audio(ref, 1).samples); },
          py::arg("estimate"), py::arg("reference"));
    m.def("stoi", [](const RealArray& est, const RealArray& ref, double fs) { return stoi(to_audio(est, fs), to_audio(ref, fs)); },
          py::arg("estimate"), py::arg("reference"), py::arg("sample_rate") = 16000.0);

    m.def(
        "harmonic_noise",
        [](double duration, double fs, double f0, std::size_t harmonics, double correlation, double envelope_rate,
           double decay, bool rectify, std::uint64_t seed) {
            HarmonicNoiseParams p{f0, harmonics, correlation, envelope_rate, decay, rectify, seed};
            return to_numpy(synth_harmonic_cs_noise(duration, fs, p).samples);
        },
        py::arg("duration"), py::arg("sample_rate") = 16000.0, py::arg("f0") = 100.0, py::arg("harmonics") = 10,
        py::arg("correlation") = 0.9, py::arg("envelope_rate") = 5.0, py::arg("amplitude_decay") = 0.5,
        py::arg("rectify") = false, py::arg("seed") = 0);
    m.def(
        "mix",
        [](const RealArray& speech, const RealArray& noise, double snr_db, double fs) {
            const Mixture mx = mix_at_snr(to_audio(speech, fs), to_audio(noise, fs), MixSpec{snr_db, 0});
            return py::make_tuple(to_numpy(mx.mixture.samples), to_numpy(mx.scaled_noise.samples));
        },
        py::arg("speech"), py::arg("noise"), py::arg("snr_db"), py::arg("sample_rate") = 16000.0,
        "Returns (mixture, scaled_noise).");
    m.def(
        "speechlike", [](double duration, double fs, std::uint64_t seed) { return to_numpy(synth_speechlike(duration, fs, seed).samples); },
        py::arg("duration"), py::arg("sample_rate") = 16000.0, py::arg("seed") = 0);

    m.def("read_wav", [](const std::filesystem::path& p) {
        const AudioBuffer a = read_wav(p);
        return py::make_tuple(to_numpy(a.samples), a.sample_rate);
    });
    m.def(
        "write_wav",
        [](const std::filesystem::path& p, const RealArray& x, double fs, bool pcm16) {
            return write_wav(p, to_audio(x, fs), pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32);
        },
        py::arg("path"), py::arg("x"), py::arg("sample_rate") = 16000.0, py::arg("pcm16") = false,
        "Returns the number of clipped samples.");
}
