#pragma once

#include <span>

#include "cycmpdr/audio.hpp"

namespace cycmpdr {

// Thin wrappers over FFTW. Forward is unscaled, inverse
// scales by 1/n. `in` and `out` must have equal length and must not alias.
void fft_forward(std::span<const cplx> in, std::span<cplx> out);
void fft_inverse(std::span<const cplx> in, std::span<cplx> out);

}  // namespace cycmpdr
