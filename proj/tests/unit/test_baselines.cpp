#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "cycmpdr/baselines.hpp"
#include "cycmpdr/error.hpp"
#include "cycmpdr/speech_sim.hpp"
#include "support.hpp"

using namespace cycmpdr;

namespace {

const StftConfig& cfg16k() {
    static const StftConfig cfg = StftConfig::sqrt_hann(16000.0);
    return cfg;
}

ComplexSpectrogram small_spec(std::uint64_t seed) { return stft(test::white_noise(3000, seed), cfg16k()); }

NoisePsdEstimate noise_like(const ComplexSpectrogram& x, const Eigen::MatrixXd& power) {
    NoisePsdEstimate n;
    n.power = power;
    (void)x;
    return n;
}

}  // namespace

TEST_CASE("identity preprocessor is bit-exact", "[baselines]") {
    auto x = small_spec(1);
    CHECK(identity_preproc(x).data == x.data);
    ComplexSpectrogram z = x;
    z.data.setZero();
    CHECK(identity_preproc(z).data == z.data);
}

TEST_CASE("mask application", "[baselines]") {
    auto y = small_spec(2);
    RealMask ones{Eigen::MatrixXd::Ones(y.bins(), y.frames())};
    CHECK(apply_mask(y, ones).data == y.data);

    RealMask zeros{Eigen::MatrixXd::Zero(y.bins(), y.frames())};
    CHECK(apply_mask(y, zeros).data.cwiseAbs().maxCoeff() == 0.0);

    RealMask one_cell = ones;
    one_cell.gains(5, 3) = 0.5;
    auto out = apply_mask(y, one_cell);
    CHECK(out.data(5, 3) == 0.5 * y.data(5, 3));
    Eigen::MatrixXcd diff = out.data - y.data;
    diff(5, 3) = 0.0;
    CHECK(diff.cwiseAbs().maxCoeff() == 0.0);

    RealMask wrong{Eigen::MatrixXd::Ones(3, 3)};
    CHECK_THROWS_AS(apply_mask(y, wrong), Error);
}

TEST_CASE("masking is linear and bounded by the largest gain", "[baselines]") {
    auto a = small_spec(3);
    auto b = small_spec(4);
    Rng rng(5);
    RealMask m{Eigen::MatrixXd(a.bins(), a.frames())};
    for (Eigen::Index i = 0; i < m.gains.size(); ++i) m.gains.data()[i] = 2.0 * rng.uniform();
    ComplexSpectrogram sum = a;
    sum.data = 0.3 * a.data - 1.7 * b.data;
    Eigen::MatrixXcd expect = 0.3 * apply_mask(a, m).data - 1.7 * apply_mask(b, m).data;
    CHECK((apply_mask(sum, m).data - expect).cwiseAbs().maxCoeff() <= 1e-12);
    const double gmax = m.gains.maxCoeff();
    auto out = apply_mask(a, m);
    CHECK((out.data.cwiseAbs().array() <= gmax * a.data.cwiseAbs().array() + 1e-15).all());
}

TEST_CASE("Wiener gain in closed-form cases", "[baselines]") {
    auto x = small_spec(6);
    const double floor = 0.05623413251903491;
    const Eigen::MatrixXd p = smoothed_power(x, 0.85);

    auto g0 = wiener_gain(x, noise_like(x, Eigen::MatrixXd::Zero(x.bins(), x.frames())), floor);
    CHECK((g0.gains.array() == 1.0).all());
    CHECK(wiener_apply(x, noise_like(x, Eigen::MatrixXd::Zero(x.bins(), x.frames())), floor).data == x.data);

    auto gf = wiener_gain(x, noise_like(x, p), floor);
    CHECK((gf.gains.array() == floor).all());

    auto gh = wiener_gain(x, noise_like(x, 0.5 * p), floor);
    CHECK((gh.gains.array() - 0.5).abs().maxCoeff() <= 1e-12);

    CHECK_THROWS_AS(wiener_gain(x, noise_like(x, Eigen::MatrixXd::Zero(2, 2)), floor), Error);
    CHECK_THROWS_AS(wiener_gain(x, noise_like(x, p), 1.0), Error);
}

TEST_CASE("smoothed power follows the first-order recursion", "[baselines]") {
    auto x = small_spec(7);
    auto p = smoothed_power(x, 0.85);
    const Eigen::Index k = 17;
    double ref = std::norm(x.data(k, 0));
    CHECK(p(k, 0) == ref);
    for (Eigen::Index l = 1; l < x.frames(); ++l) {
        ref = 0.85 * ref + 0.15 * std::norm(x.data(k, l));
        CHECK(p(k, l) == Catch::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("minimum statistics on stationary white noise", "[baselines]") {
    const auto& cfg = cfg16k();
    auto x = stft(test::white_noise(160000, 8), cfg);
    auto est = min_stats_noise_psd(x);
    // E|X|^2 = sigma^2 * sum(w^2) for the analysis window.
    double win_energy = 0.0;
    for (double w : cfg.window) win_energy += w * w;
    const Eigen::Index start = static_cast<Eigen::Index>(1.5 * 16000.0 / static_cast<double>(cfg.hop));
    std::size_t good = 0, total = 0;
    for (Eigen::Index k = 1; k < x.bins(); ++k) {
        if (k == x.bins() / 2) continue;  // Nyquist bin is real-valued: different distribution
        const double mean_est = est.power.row(k).tail(x.frames() - start).mean();
        const double ratio = mean_est / win_energy;
        ++total;
        if (ratio >= 0.3 && ratio <= 1.5) ++good;
    }
    CHECK(static_cast<double>(good) >= 0.9 * static_cast<double>(total));
}

TEST_CASE("minimum statistics: zero input, invariants, and short input", "[baselines]") {
    const auto& cfg = cfg16k();
    AudioBuffer z;
    z.samples.assign(32000, 0.0);
    auto zero_est = min_stats_noise_psd(stft(z, cfg));
    CHECK(zero_est.power.cwiseAbs().maxCoeff() == 0.0);

    auto speech = synth_speechlike(4.0, 16000.0, 9);
    auto x = stft(speech, cfg);
    auto est = min_stats_noise_psd(x);
    const Eigen::MatrixXd p = smoothed_power(x, 0.85);
    CHECK((est.power.array() >= 0.0).all());
    CHECK((est.power.array() <= 1.5 * p.array() * (1.0 + 1e-12)).all());

    auto g = wiener_gain(x, est, 0.05623413251903491);
    CHECK((g.gains.array() >= 0.05623413251903491).all());
    CHECK((g.gains.array() <= 1.0).all());

    auto short_x = stft(test::white_noise(16000, 10), cfg);
    CHECK_THROWS_AS(min_stats_noise_psd(short_x, 1.5), Error);
}

TEST_CASE("minimum statistics tracks speech pauses", "[baselines]") {
    auto speech = synth_speechlike(10.0, 16000.0, 11);
    auto x = stft(speech, cfg16k());
    auto est = min_stats_noise_psd(x);
    const Eigen::VectorXd speech_psd = x.data.cwiseAbs2().rowwise().mean();
    const Eigen::VectorXd noise_psd = est.power.rowwise().mean();
    // Speech-active bins: the positive-frequency bins holding the top decile of speech power.
    std::vector<double> sorted(speech_psd.data(), speech_psd.data() + 257);
    std::sort(sorted.begin(), sorted.end());
    const double cut = sorted[static_cast<std::size_t>(0.9 * 257)];
    std::size_t active = 0;
    for (Eigen::Index k = 0; k < 257; ++k) {
        if (speech_psd(k) < cut) continue;
        ++active;
        CHECK(noise_psd(k) <= 0.1 * speech_psd(k));
    }
    CHECK(active > 0);
}

TEST_CASE("oracle ideal ratio mask", "[baselines]") {
    auto clean = small_spec(12);
    ComplexSpectrogram zero = clean;
    zero.data.setZero();
    auto m1 = oracle_irm(clean, zero);
    for (Eigen::Index i = 0; i < m1.gains.size(); ++i) {
        if (std::norm(clean.data.data()[i]) > 1e-3) CHECK(std::abs(m1.gains.data()[i] - 1.0) <= 1e-6);
    }

    auto m2 = oracle_irm(clean, clean);
    CHECK(m2.gains(10, 10) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));

    auto m3 = oracle_irm(zero, clean);
    CHECK(m3.gains.cwiseAbs().maxCoeff() == 0.0);

    auto noise = small_spec(13);
    auto m4 = oracle_irm(clean, noise);
    CHECK((m4.gains.array() >= 0.0).all());
    CHECK((m4.gains.array() < 1.0).all());

    ComplexSpectrogram wrong;
    wrong.data = Eigen::MatrixXcd::Zero(4, 4);
    CHECK_THROWS_AS(oracle_irm(clean, wrong), Error);
}
