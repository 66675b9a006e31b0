#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>

#include "cycmpdr/error.hpp"
#include "cycmpdr/wav.hpp"
#include "support.hpp"

using namespace cycmpdr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "cycmpdr_wav_tests";
    fs::create_directories(dir);
    return dir / name;
}

template <typename T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void write_raw_pcm16(const fs::path& path, std::uint16_t channels, const std::vector<std::int16_t>& data) {
    std::ofstream os(path, std::ios::binary);
    const std::uint32_t bytes = static_cast<std::uint32_t>(data.size() * 2);
    os.write("RIFF", 4);
    put<std::uint32_t>(os, 36 + bytes);
    os.write("WAVEfmt ", 8);
    put<std::uint32_t>(os, 16);
    put<std::uint16_t>(os, 1);
    put<std::uint16_t>(os, channels);
    put<std::uint32_t>(os, 16000);
    put<std::uint32_t>(os, 16000u * 2u * channels);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(2 * channels));
    put<std::uint16_t>(os, 16);
    os.write("data", 4);
    put<std::uint32_t>(os, bytes);
    for (auto v : data) put(os, v);
}

}  // namespace

TEST_CASE("PCM16 full scale reads as 32767/32768", "[wav]") {
    auto p = scratch("full.wav");
    write_raw_pcm16(p, 1, {32767, -32768, 0});
    auto b = read_wav(p);
    REQUIRE(b.size() == 3);
    CHECK(b.sample_rate == 16000.0);
    CHECK(b.samples[0] == 32767.0 / 32768.0);
    CHECK(b.samples[1] == -1.0);
    CHECK(b.samples[2] == 0.0);
}

TEST_CASE("float32 round trip is bit-exact", "[wav]") {
    auto x = test::white_noise(1000, 1, 16000.0, 0.2);
    for (auto& v : x.samples) v = static_cast<float>(v);
    auto p = scratch("float.wav");
    CHECK(write_wav(p, x, WavEncoding::Float32) == 0);
    auto y = read_wav(p);
    CHECK(y.samples == x.samples);
    CHECK(y.sample_rate == 16000.0);
}

TEST_CASE("PCM16 round trip within quantization", "[wav]") {
    auto x = test::white_noise(1000, 2, 8000.0, 0.2);
    auto p = scratch("pcm.wav");
    write_wav(p, x, WavEncoding::Pcm16);
    auto y = read_wav(p);
    CHECK(y.sample_rate == 8000.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y.samples[i] - x.samples[i]) <= 1.0 / 32768.0);
}

TEST_CASE("clipping is counted", "[wav]") {
    AudioBuffer b;
    b.samples = {2.0, -2.0, 0.5, 1.0, -1.5};
    for (auto enc : {WavEncoding::Float32, WavEncoding::Pcm16}) {
        auto p = scratch("clip.wav");
        CHECK(write_wav(p, b, enc) == 3);
        auto y = read_wav(p);
        CHECK(y.samples[0] <= 1.0);
        CHECK(y.samples[1] >= -1.0);
    }
}

TEST_CASE("WAV errors are descriptive", "[wav]") {
    auto stereo = scratch("stereo.wav");
    write_raw_pcm16(stereo, 2, {1, 2, 3, 4});
    CHECK_THROWS_WITH(read_wav(stereo), Catch::Matchers::ContainsSubstring("2 channels"));

    CHECK_THROWS_AS(write_wav(scratch("empty.wav"), AudioBuffer{}), Error);
    AudioBuffer one;
    one.samples = {0.1};
    CHECK_THROWS_AS(write_wav("/nonexistent_dir/x/y.wav", one), Error);
    one.samples = {std::nan("")};
    CHECK_THROWS_AS(write_wav(scratch("nan.wav"), one), Error);
    CHECK_THROWS_AS(read_wav(scratch("missing.wav")), Error);

    auto junk = scratch("junk.wav");
    std::ofstream(junk) << "not a wave file at all";
    CHECK_THROWS_AS(read_wav(junk), Error);
}
