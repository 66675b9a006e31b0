#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cycmpdr/cyclic_estimation.hpp"
#include "cycmpdr/error.hpp"
#include "cycmpdr/noise_synth.hpp"
#include "cycmpdr/speech_sim.hpp"
#include "support.hpp"

using namespace cycmpdr;

namespace {

constexpr double kFs = 16000.0;
constexpr double kWelchBin = kFs / 4096.0;

bool has_near(const std::vector<double>& v, double f, double tol) {
    return std::any_of(v.begin(), v.end(), [&](double x) { return std::abs(x - f) <= tol; });
}

void check_valid(const ModulationSet& m, std::size_t cmax) {
    REQUIRE(m.size() >= 1);
    CHECK(m.size() <= cmax);
    CHECK(m[0] == 0.0);
    for (std::size_t i = 1; i < m.size(); ++i) {
        CHECK(std::abs(m[i]) < kFs / 2);
        for (std::size_t j = 0; j < i; ++j) CHECK(m[i] != m[j]);
    }
}

}  // namespace

TEST_CASE("Welch PSD of white noise is flat", "[estimation]") {
    auto x = test::white_noise(static_cast<std::size_t>(10 * kFs), 31);
    auto psd = welch_periodogram(x, 4096, 0.5);
    REQUIRE(psd.segments >= 30);
    CHECK(psd.resolution_hz == Catch::Approx(kWelchBin));
    std::vector<double> p = psd.power;
    std::nth_element(p.begin(), p.begin() + p.size() / 2, p.end());
    const double med = p[p.size() / 2];
    CHECK(med == Catch::Approx(2.0 / kFs).epsilon(0.1));  // one-sided density of unit variance
    // DC and Nyquist bins carry half the one-sided density; skip them.
    for (std::size_t k = 1; k + 1 < psd.power.size(); ++k) {
        const double db = 10.0 * std::log10(psd.power[k] / med);
        CHECK(std::abs(db) <= 3.0);
    }
}

TEST_CASE("Welch PSD of a tone has the closed-form peak power", "[estimation]") {
    const double amp = 0.5;
    const std::size_t bin = 26;
    auto x = test::tone(static_cast<std::size_t>(4 * kFs), bin * kWelchBin, amp);
    auto psd = welch_periodogram(x, 4096, 0.5);
    // Hann: (sum w)^2 / sum w^2 = 2N/3, so the density peak is A^2 N / (3 fs).
    const double expected = amp * amp * 4096.0 / (3.0 * kFs);
    CHECK(psd.power[bin] == Catch::Approx(expected).epsilon(0.1));
    CHECK(std::max_element(psd.power.begin(), psd.power.end()) - psd.power.begin() == static_cast<long>(bin));
}

TEST_CASE("Welch PSD of zeros is zero; short input is rejected", "[estimation]") {
    AudioBuffer z;
    z.samples.assign(10000, 0.0);
    auto psd = welch_periodogram(z);
    CHECK(*std::max_element(psd.power.begin(), psd.power.end()) == 0.0);

    AudioBuffer short_sig = test::white_noise(4095, 1);
    CHECK_THROWS_AS(welch_periodogram(short_sig, 4096, 0.5), Error);
}

TEST_CASE("peak picking finds tones and harmonic series", "[estimation]") {
    SECTION("two tones in mild noise") {
        auto x = test::add(test::add(test::tone(80000, 100.0), test::tone(80000, 250.0, 0.7)),
                           test::white_noise(80000, 2, kFs, 0.05));
        auto peaks = pick_peaks(welch_periodogram(x));
        REQUIRE(peaks.size() == 2);
        CHECK(std::abs(peaks.frequencies[0] - 100.0) <= kWelchBin);
        CHECK(std::abs(peaks.frequencies[1] - 250.0) <= kWelchBin);
        CHECK(std::is_sorted(peaks.frequencies.begin(), peaks.frequencies.end()));
        for (double p : peaks.powers) CHECK(p > 0.0);
    }
    SECTION("flat spectrum") {
        auto x = test::white_noise(160000, 3);
        CHECK(pick_peaks(welch_periodogram(x)).empty());
    }
    SECTION("harmonic series at 120 Hz") {
        HarmonicNoiseParams p;
        p.f0_hz = 120.0;
        p.num_harmonics = 5;
        p.seed = 5;
        auto v = synth_harmonic_cs_noise(10.0, kFs, p);
        auto peaks = pick_peaks(welch_periodogram(v));
        for (double f : {120.0, 240.0, 360.0, 480.0, 600.0}) CHECK(has_near(peaks.frequencies, f, kWelchBin));
    }
    SECTION("max_peaks truncates by power") {
        AudioBuffer x = test::white_noise(80000, 4, kFs, 0.01);
        for (int h = 1; h <= 8; ++h) x = test::add(x, test::tone(80000, 200.0 * h, 1.0 / h));
        PeakPickOptions o;
        o.max_peaks = 3;
        auto peaks = pick_peaks(welch_periodogram(x), o);
        REQUIRE(peaks.size() == 3);
        CHECK(std::abs(peaks.frequencies[2] - 600.0) <= kWelchBin);
    }
}

TEST_CASE("candidate shifts are merged pairwise differences", "[estimation]") {
    PeakList a;
    a.frequencies = {100.0, 250.0};
    a.powers = {1.0, 1.0};
    a.resolution_hz = kWelchBin;
    auto ca = candidate_modulations(a);
    REQUIRE(ca.size() == 1);
    CHECK(ca[0] == Catch::Approx(150.0));

    PeakList b;
    b.frequencies = {120.0, 240.0, 360.0};
    b.powers = {1.0, 2.0, 3.0};
    b.resolution_hz = kWelchBin;
    auto cb = candidate_modulations(b);
    REQUIRE(cb.size() == 2);
    CHECK(cb[0] == Catch::Approx(120.0));
    CHECK(cb[1] == Catch::Approx(240.0));

    auto support = candidate_shifts(b, kWelchBin);
    REQUIRE(support.size() == 2);
    CHECK(support[0].support == Catch::Approx(std::sqrt(2.0) + std::sqrt(6.0)));

    PeakList c;
    c.frequencies = {500.0};
    c.powers = {1.0};
    c.resolution_hz = kWelchBin;
    CHECK(candidate_modulations(c).empty());
}

TEST_CASE("spectral coherence basics", "[estimation]") {
    auto cfg = StftConfig::sqrt_hann(kFs);

    SECTION("self coherence is one") {
        auto x = test::white_noise(32000, 6);
        CHECK(spectral_coherence(x, 0.0, cfg) == 1.0);
    }
    SECTION("white noise is incoherent") {
        auto x = test::white_noise(static_cast<std::size_t>(10 * kFs), 7);
        CHECK(spectral_coherence(x, 100.0, cfg) < 0.1);
    }
    SECTION("shared envelope makes harmonics coherent") {
        const std::size_t n = static_cast<std::size_t>(10 * kFs);
        auto env = lowpass_gaussian(n, kFs, 5.0, 8);
        const double f0 = 150.0;
        AudioBuffer x;
        x.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / kFs;
            x.samples[i] = env[i] * (std::cos(2 * std::numbers::pi * f0 * t + 0.3) +
                                     std::cos(2 * std::numbers::pi * 2 * f0 * t + 1.1));
        }
        CHECK(spectral_coherence(x, f0, cfg) >= 0.8);
    }
    SECTION("scale invariance") {
        HarmonicNoiseParams p;
        p.seed = 9;
        auto v = synth_harmonic_cs_noise(4.0, kFs, p);
        const double c1 = spectral_coherence(v, 100.0, cfg);
        for (double c : {1e-3, -2.5, 1e4}) {
            AudioBuffer s = v;
            for (auto& x : s.samples) x *= c;
            CHECK(std::abs(spectral_coherence(s, 100.0, cfg) - c1) <= 1e-10);
        }
    }
    SECTION("range and degenerate input") {
        auto x = test::add(test::white_noise(32000, 10), test::tone(32000, 440.0));
        for (double a : {13.0, 100.0, 440.0, 3000.0}) {
            const double c = spectral_coherence(x, a, cfg);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
        }
        AudioBuffer z;
        z.samples.assign(32000, 0.0);
        CHECK_THROWS_AS(spectral_coherence(z, 100.0, cfg), Error);
    }
}

TEST_CASE("analyzer matches the free function and refines toward the true shift", "[estimation]") {
    auto cfg = StftConfig::sqrt_hann(kFs);
    HarmonicNoiseParams p;
    p.f0_hz = 97.3;
    p.seed = 12;
    auto v = synth_harmonic_cs_noise(6.0, kFs, p);
    CoherenceAnalyzer an(v, cfg);
    CHECK(an.coherence(97.3) == Catch::Approx(spectral_coherence(v, 97.3, cfg)).epsilon(1e-12));
    auto r = an.refine(95.0, kWelchBin);
    CHECK(std::abs(r.alpha - 97.3) < 0.2);
    CHECK(r.coherence >= an.coherence(95.0));
    CHECK(r.coherence == Catch::Approx(an.coherence(r.alpha)).epsilon(1e-12));
}

TEST_CASE("modulation set estimation", "[estimation]") {
    auto cfg = StftConfig::sqrt_hann(kFs);

    SECTION("white noise gives the trivial set") {
        auto x = test::white_noise(static_cast<std::size_t>(10 * kFs), 13);
        CHECK(estimate_modulation_set(x, cfg).modset == ModulationSet());
    }
    SECTION("correlated harmonic noise at 100 Hz") {
        HarmonicNoiseParams p;
        p.f0_hz = 100.0;
        p.seed = 14;
        auto v = synth_harmonic_cs_noise(10.0, kFs, p);
        auto est = estimate_modulation_set(v, cfg);
        check_valid(est.modset, 5);
        CHECK(has_near(est.modset.shifts(), 100.0, kWelchBin));
        for (const auto& r : est.reports) {
            CHECK(r.coherence >= 0.0);
            CHECK(r.coherence <= 1.0);
        }
    }
    SECTION("C_max = 1 always yields the trivial set") {
        HarmonicNoiseParams p;
        p.seed = 15;
        auto v = synth_harmonic_cs_noise(4.0, kFs, p);
        ModsetOptions o;
        o.max_channels = 1;
        CHECK(estimate_modulation_set(v, cfg, o).modset == ModulationSet());
    }
    SECTION("short input gives the trivial set") {
        auto x = test::white_noise(2000, 16);
        CHECK(estimate_modulation_set(x, cfg).modset == ModulationSet());
    }
    SECTION("result is always a valid set and deterministic") {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            HarmonicNoiseParams p;
            p.f0_hz = 60.0 + 30.0 * static_cast<double>(seed);
            p.seed = 100 + seed;
            auto speech = synth_speechlike(5.0, kFs, seed);
            auto noise = synth_harmonic_cs_noise(5.0, kFs, p);
            auto mix = mix_at_snr(speech, noise, {-5.0, seed}).mixture;
            ModsetOptions o;
            o.max_channels = 2 + seed;
            auto a = estimate_modulation_set(mix, cfg, o);
            check_valid(a.modset, o.max_channels);
            CHECK(estimate_modulation_set(mix, cfg, o).modset == a.modset);
        }
    }
}
