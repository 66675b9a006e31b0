#include "cycmpdr/cyclic_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cycmpdr/error.hpp"
#include "cycmpdr/fft.hpp"

namespace cycmpdr {

Psd welch_periodogram(const AudioBuffer& signal, std::size_t seg_len, double overlap) {
    if (seg_len < 2) throw Error("welch: segment length must be at least 2");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw Error("welch: overlap must lie in [0, 1)");
    if (signal.size() < seg_len) throw Error("welch: signal shorter than one segment");

    const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seg_len * (1.0 - overlap))));
    const std::size_t segments = (signal.size() - seg_len) / step + 1;

    std::vector<double> window(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg_len));
    }
    const double u = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

    const std::size_t half = seg_len / 2;
    Psd psd;
    psd.power.assign(half + 1, 0.0);
    psd.resolution_hz = signal.sample_rate / static_cast<double>(seg_len);
    psd.segments = segments;

    std::vector<cplx> frame(seg_len), spectrum(seg_len);
    for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t off = s * step;
        for (std::size_t i = 0; i < seg_len; ++i) frame[i] = signal.samples[off + i] * window[i];
        fft_forward(frame, spectrum);
        for (std::size_t k = 0; k <= half; ++k) psd.power[k] += std::norm(spectrum[k]);
    }
    const double scale = 1.0 / (signal.sample_rate * u * static_cast<double>(segments));
    for (std::size_t k = 0; k <= half; ++k) {
        const bool edge = (k == 0) || (seg_len % 2 == 0 && k == half);
        psd.power[k] *= (edge ? 1.0 : 2.0) * scale;
    }
    return psd;
}

PeakList pick_peaks(const Psd& psd, const PeakPickOptions& opts) {
    if (opts.max_peaks == 0) throw Error("pick_peaks: max_peaks must be at least 1");
    PeakList out;
    out.resolution_hz = psd.resolution_hz;
    const auto& p = psd.power;
    if (p.size() < 3) return out;

    std::vector<double> sorted = p;
    auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    const double threshold = *mid * std::pow(10.0, opts.threshold_db / 10.0);

    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        if (p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] > threshold) maxima.push_back(i);
    }
    std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });

    std::vector<std::size_t> kept;
    for (std::size_t i : maxima) {
        if (kept.size() == opts.max_peaks) break;
        const bool crowded = std::any_of(kept.begin(), kept.end(), [&](std::size_t j) {
            return (i > j ? i - j : j - i) <= opts.min_separation_bins;
        });
        if (!crowded) kept.push_back(i);
    }
    std::sort(kept.begin(), kept.end());

    for (std::size_t i : kept) {
        double offset = 0.0;
        if (opts.interpolate && p[i - 1] > 0.0 && p[i + 1] > 0.0) {
            const double a = std::log(p[i - 1]), b = std::log(p[i]), c = std::log(p[i + 1]);
            const double denom = a - 2.0 * b + c;
            if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        }
        out.frequencies.push_back((static_cast<double>(i) + offset) * psd.resolution_hz);
        out.powers.push_back(p[i]);
    }
    return out;
}

std::vector<Candidate> candidate_shifts(const PeakList& peaks, double merge_tol_hz) {
    std::vector<Candidate> diffs;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        for (std::size_t j = i + 1; j < peaks.size(); ++j) {
            const double d = peaks.frequencies[j] - peaks.frequencies[i];
            if (d > 0.0) diffs.push_back({d, std::sqrt(peaks.powers[i] * peaks.powers[j])});
        }
    }
    std::sort(diffs.begin(), diffs.end(),
              [](const Candidate& a, const Candidate& b) { return a.frequency_hz < b.frequency_hz; });

    std::vector<Candidate> merged;
    double weighted = 0.0;
    for (const Candidate& d : diffs) {
        if (!merged.empty() && std::abs(d.frequency_hz - merged.back().frequency_hz) <= merge_tol_hz) {
            Candidate& m = merged.back();
            weighted += d.frequency_hz * d.support;
            m.support += d.support;
            m.frequency_hz = weighted / m.support;
        } else {
            merged.push_back(d);
            weighted = d.frequency_hz * d.support;
        }
    }
    return merged;
}

std::vector<double> candidate_modulations(const PeakList& peaks) {
    std::vector<double> out;
    for (const Candidate& c : candidate_shifts(peaks, peaks.resolution_hz)) out.push_back(c.frequency_hz);
    return out;
}

// --- coherence -------------------------------------------------------------

namespace {

std::vector<double> bin_energy(const ComplexSpectrogram& s) {
    std::vector<double> e(static_cast<std::size_t>(s.bins()));
    for (Eigen::Index k = 0; k < s.bins(); ++k) e[static_cast<std::size_t>(k)] = s.data.row(k).squaredNorm();
    return e;
}

}  // namespace

CoherenceAnalyzer::CoherenceAnalyzer(const AudioBuffer& signal, const StftConfig& cfg, double top_fraction)
    : signal_(signal), cfg_(cfg), top_fraction_(top_fraction), base_(stft(signal, cfg)),
      base_energy_(bin_energy(base_)) {
    if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw Error("coherence: top fraction must lie in (0, 1]");
    if (std::accumulate(base_energy_.begin(), base_energy_.end(), 0.0) <= 0.0) {
        throw Error("coherence: zero-energy signal");
    }
}

std::vector<Eigen::Index> CoherenceAnalyzer::top_bins(const ComplexSpectrogram& shifted, std::vector<double>& e0,
                                                      std::vector<double>& ea) const {
    e0 = base_energy_;
    ea = bin_energy(shifted);
    const std::size_t k_total = e0.size();
    std::vector<double> joint(k_total);
    for (std::size_t k = 0; k < k_total; ++k) joint[k] = std::sqrt(e0[k] * ea[k]);

    std::vector<Eigen::Index> order(k_total);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return joint[static_cast<std::size_t>(a)] > joint[static_cast<std::size_t>(b)];
    });
    const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(top_fraction_ * static_cast<double>(k_total))));
    std::vector<Eigen::Index> bins;
    for (Eigen::Index k : order) {
        if (bins.size() == want || joint[static_cast<std::size_t>(k)] <= 0.0) break;
        bins.push_back(k);
    }
    return bins;
}

double CoherenceAnalyzer::coherence(double alpha) const {
    const ComplexSpectrogram shifted = alpha == 0.0 ? base_ : stft(modulate(signal_, alpha), cfg_);
    std::vector<double> e0, ea;
    const auto bins = top_bins(shifted, e0, ea);
    if (bins.empty()) return 0.0;
    // Per-bin coherences averaged with joint-energy weights: sum |cross| / sum sqrt(e0 ea).
    double num = 0.0, den = 0.0;
    for (Eigen::Index k : bins) {
        const cplx cross = base_.data.row(k).dot(shifted.data.row(k));  // sum conj(base) * shifted
        num += std::abs(cross);
        den += std::sqrt(e0[static_cast<std::size_t>(k)] * ea[static_cast<std::size_t>(k)]);
    }
    return std::min(1.0, num / den);
}

CoherenceAnalyzer::Refined CoherenceAnalyzer::refine(double center, double half_width) const {
    const double nyq = 0.5 * cfg_.sample_rate;
    const ComplexSpectrogram shifted = stft(modulate(signal_, center), cfg_);
    std::vector<double> e0, ea;
    const auto bins = top_bins(shifted, e0, ea);
    if (bins.empty()) return {center, 0.0};

    const Eigen::Index frames = base_.frames();
    // Per-bin cross products and the sample index at each frame center.
    Eigen::MatrixXcd cross(static_cast<Eigen::Index>(bins.size()), frames);
    for (std::size_t b = 0; b < bins.size(); ++b) {
        const Eigen::Index k = bins[b];
        cross.row(static_cast<Eigen::Index>(b)) =
            base_.data.row(k).array() * shifted.data.row(k).array().conjugate();
    }
    std::vector<double> center_time(static_cast<std::size_t>(frames));
    for (Eigen::Index l = 0; l < frames; ++l) {
        const double n = static_cast<double>(l) * static_cast<double>(cfg_.hop) - static_cast<double>(cfg_.edge_pad()) +
                         0.5 * static_cast<double>(cfg_.frame_len);
        center_time[static_cast<std::size_t>(l)] = n / cfg_.sample_rate;
    }

    Eigen::VectorXcd ramp(frames);
    auto score = [&](double delta) {
        if (std::abs(center + delta) >= nyq) return -1.0;
        for (Eigen::Index l = 0; l < frames; ++l) {
            ramp(l) = std::polar(1.0, -2.0 * std::numbers::pi * delta * center_time[static_cast<std::size_t>(l)]);
        }
        const Eigen::VectorXcd sums = cross * ramp;
        double acc = 0.0;
        for (std::size_t b = 0; b < bins.size(); ++b) acc += std::abs(sums(static_cast<Eigen::Index>(b)));
        return acc;
    };
    auto scan = [&](double lo, double hi, double step, double& best_delta, double& best_value) {
        const auto steps = static_cast<long>(std::ceil((hi - lo) / step));
        for (long s = 0; s <= steps; ++s) {
            const double delta = lo + static_cast<double>(s) * step;
            const double v = score(delta);
            if (v > best_value) {
                best_value = v;
                best_delta = delta;
            }
        }
    };

    // The coherence peak is about 2 / duration wide at its base: scan at a
    // quarter of that, then at a twentieth around the best point.
    const double width = 1.0 / std::max(signal_.duration(), 1e-3);
    double best_delta = 0.0, best_value = -1.0;
    scan(-half_width, half_width, 0.5 * width, best_delta, best_value);
    const double coarse = best_delta;
    scan(coarse - 0.5 * width, coarse + 0.5 * width, 0.05 * width, best_delta, best_value);
    const double alpha = center + best_delta;
    return {alpha, coherence(alpha)};
}

double spectral_coherence(const AudioBuffer& signal, double alpha, const StftConfig& cfg, double top_fraction) {
    if (!(std::abs(alpha) < 0.5 * signal.sample_rate)) throw Error("coherence: |alpha| must be below fs/2");
    return CoherenceAnalyzer(signal, cfg, top_fraction).coherence(alpha);
}

// --- modulation set ----------------------------------------------------------

ModsetEstimate estimate_modulation_set(const AudioBuffer& signal, const StftConfig& cfg, const ModsetOptions& opts) {
    ModsetEstimate est;
    if (opts.max_channels <= 1 || signal.size() < opts.welch_seg_len) return est;
    if (energy(signal.samples) <= 0.0) return est;

    const Psd psd = welch_periodogram(signal, opts.welch_seg_len, opts.welch_overlap);
    PeakPickOptions pp;
    pp.max_peaks = opts.max_peaks;
    pp.threshold_db = opts.peak_threshold_db;
    est.peaks = pick_peaks(psd, pp);

    const double min_shift = opts.min_shift_bins * signal.sample_rate / static_cast<double>(cfg.fft_size);
    std::vector<Candidate> cands;
    for (const Candidate& c : candidate_shifts(est.peaks, psd.resolution_hz)) {
        if (c.frequency_hz >= min_shift && c.frequency_hz < 0.5 * signal.sample_rate) cands.push_back(c);
    }
    if (cands.empty()) return est;
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.support > b.support; });
    if (cands.size() > opts.max_candidates) cands.resize(opts.max_candidates);
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.frequency_hz < b.frequency_hz; });

    const CoherenceAnalyzer analyzer(signal, cfg, opts.top_fraction);
    for (const Candidate& c : cands) {
        CoherenceReport r;
        r.candidate = c.frequency_hz;
        r.support = c.support;
        if (opts.refine) {
            const auto refined = analyzer.refine(c.frequency_hz, 0.75 * psd.resolution_hz);
            r.refined = refined.alpha;
            r.coherence = refined.coherence;
        } else {
            r.refined = c.frequency_hz;
            r.coherence = analyzer.coherence(c.frequency_hz);
        }
        r.accepted = r.coherence >= opts.coherence_threshold && r.refined >= min_shift;
        est.reports.push_back(r);
    }

    // Coherence only gates: every multiple of a shared fundamental is about
    // equally coherent, so rank by how many strong peak pairs a shift couples.
    // Refined shifts that collapse onto one another keep the best.
    std::vector<const CoherenceReport*> ranked;
    for (const auto& r : est.reports) {
        if (r.accepted) ranked.push_back(&r);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const CoherenceReport* a, const CoherenceReport* b) { return a->support > b->support; });
    std::vector<double> chosen;
    for (const CoherenceReport* r : ranked) {
        if (chosen.size() + 1 >= opts.max_channels) break;
        const bool duplicate = std::any_of(chosen.begin(), chosen.end(), [&](double a) {
            return std::abs(a - r->refined) < 0.5 * psd.resolution_hz;
        });
        if (!duplicate) chosen.push_back(r->refined);
    }
    for (auto& r : est.reports) {
        r.accepted = std::find(chosen.begin(), chosen.end(), r.refined) != chosen.end();
    }
    std::sort(chosen.begin(), chosen.end());
    chosen.insert(chosen.begin(), 0.0);
    est.modset = ModulationSet(std::move(chosen));
    return est;
}

}  // namespace cycmpdr
