#pragma once

#include <cstddef>
#include <filesystem>

#include "cycmpdr/audio.hpp"

namespace cycmpdr {

enum class WavEncoding { Pcm16, Float32 };

/// Mono PCM16 or IEEE float32 WAV, samples scaled to [-1, 1].
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes a mono RIFF/WAVE file. Samples outside [-1, 1] are clipped; the
/// number of clipped samples is returned.
std::size_t write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
                      WavEncoding encoding = WavEncoding::Float32);

}  // namespace cycmpdr
