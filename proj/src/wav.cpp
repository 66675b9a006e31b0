#include "cycmpdr/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cycmpdr/error.hpp"

namespace cycmpdr {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <class T>
T read_le(const std::vector<char>& buf, std::size_t off) {
    if (off + sizeof(T) > buf.size()) throw Error("wav: truncated header");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    return v;
}

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("wav: cannot open " + path.string());
    const std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
        throw Error("wav: " + path.string() + " is not a RIFF/WAVE file");
    }

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_off = 0, data_len = 0;
    bool have_fmt = false, have_data = false;
    std::size_t off = 12;
    while (off + 8 <= buf.size()) {
        const std::string id(buf.data() + off, 4);
        const auto len = read_le<std::uint32_t>(buf, off + 4);
        const std::size_t body = off + 8;
        if (id == "fmt ") {
            format = read_le<std::uint16_t>(buf, body);
            channels = read_le<std::uint16_t>(buf, body + 2);
            rate = read_le<std::uint32_t>(buf, body + 4);
            bits = read_le<std::uint16_t>(buf, body + 14);
            if (format == kFormatExtensible && len >= 40) format = read_le<std::uint16_t>(buf, body + 24);
            have_fmt = true;
        } else if (id == "data") {
            data_off = body;
            data_len = std::min<std::size_t>(len, buf.size() - body);
            have_data = true;
        }
        off = body + len + (len & 1u);
    }
    if (!have_fmt || !have_data) throw Error("wav: " + path.string() + " lacks fmt or data chunk");
    if (channels != 1) throw Error("wav: " + path.string() + " has " + std::to_string(channels) + " channels, expected mono");

    AudioBuffer out;
    out.sample_rate = rate;
    if (format == kFormatPcm && bits == 16) {
        out.samples.resize(data_len / 2);
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            out.samples[i] = static_cast<double>(read_le<std::int16_t>(buf, data_off + 2 * i)) / 32768.0;
        }
    } else if (format == kFormatFloat && bits == 32) {
        out.samples.resize(data_len / 4);
        for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = read_le<float>(buf, data_off + 4 * i);
    } else {
        throw Error("wav: " + path.string() + " uses unsupported encoding (format " + std::to_string(format) + ", " +
                    std::to_string(bits) + " bits); expected PCM16 or float32");
    }
    return out;
}

std::size_t write_wav(const std::filesystem::path& path, const AudioBuffer& buffer, WavEncoding encoding) {
    if (buffer.empty()) throw Error("wav: refusing to write an empty buffer");
    if (!(buffer.sample_rate > 0.0) || buffer.sample_rate != std::round(buffer.sample_rate)) {
        throw Error("wav: sample rate must be a positive integer");
    }
    for (double v : buffer.samples) {
        if (!std::isfinite(v)) throw Error("wav: non-finite sample");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("wav: cannot write " + path.string());

    const bool pcm = encoding == WavEncoding::Pcm16;
    const std::uint16_t bytes = pcm ? 2 : 4;
    const auto n = static_cast<std::uint32_t>(buffer.size());
    const auto rate = static_cast<std::uint32_t>(buffer.sample_rate);
    const std::uint32_t data_len = n * bytes;

    os.write("RIFF", 4);
    put<std::uint32_t>(os, 36 + data_len);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    put<std::uint32_t>(os, 16);
    put<std::uint16_t>(os, pcm ? kFormatPcm : kFormatFloat);
    put<std::uint16_t>(os, 1);
    put<std::uint32_t>(os, rate);
    put<std::uint32_t>(os, rate * bytes);
    put<std::uint16_t>(os, bytes);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(bytes * 8));
    os.write("data", 4);
    put<std::uint32_t>(os, data_len);

    std::size_t clipped = 0;
    for (double v : buffer.samples) {
        if (v > 1.0 || v < -1.0) {
            ++clipped;
            v = std::clamp(v, -1.0, 1.0);
        }
        if (pcm) {
            put<std::int16_t>(os, static_cast<std::int16_t>(std::clamp(std::lround(v * 32768.0), -32768L, 32767L)));
        } else {
            put<float>(os, static_cast<float>(v));
        }
    }
    if (!os) throw Error("wav: failed writing " + path.string());
    return clipped;
}

}  // namespace cycmpdr
