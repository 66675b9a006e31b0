#include "cycmpdr/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "cycmpdr/error.hpp"

namespace cycmpdr {
namespace {

// The FFTW planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (size, direction) and never freed.
std::mutex planner_mutex;

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

const PlanPair& plans_for(std::size_t n) {
    thread_local std::map<std::size_t, PlanPair> cache;
    if (auto it = cache.find(n); it != cache.end()) return it->second;

    static std::map<std::size_t, PlanPair> shared;
    std::lock_guard lock(planner_mutex);
    auto& entry = shared[n];
    if (!entry.forward) {
        auto* in = fftw_alloc_complex(n);
        auto* out = fftw_alloc_complex(n);
        const int size = static_cast<int>(n);
        // Out-of-place complex plans preserve their input by default.
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        entry.forward = fftw_plan_dft_1d(size, in, out, FFTW_FORWARD, flags);
        entry.inverse = fftw_plan_dft_1d(size, in, out, FFTW_BACKWARD, flags);
        fftw_free(in);
        fftw_free(out);
        if (!entry.forward || !entry.inverse) throw Error("fft: planning failed");
    }
    return cache[n] = entry;
}

void check(std::span<const cplx> in, std::span<cplx> out) {
    if (in.size() != out.size() || in.empty()) throw Error("fft: size mismatch or empty input");
}

void execute(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out) {
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
    fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

void fft_forward(std::span<const cplx> in, std::span<cplx> out) {
    check(in, out);
    execute(plans_for(in.size()).forward, in, out);
}

void fft_inverse(std::span<const cplx> in, std::span<cplx> out) {
    check(in, out);
    execute(plans_for(in.size()).inverse, in, out);
    const double scale = 1.0 / static_cast<double>(in.size());
    for (auto& v : out) v *= scale;
}

}  // namespace cycmpdr
