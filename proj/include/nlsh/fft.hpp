#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

namespace nlsh {

using cplx = std::complex<double>;

namespace detail {

// The FFTW planner is not re-entrant; plan execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace detail

/// Complex 1-D FFT of fixed length with its own aligned work buffer.
///
/// Plans are built with FFTW_ESTIMATE so that the chosen algorithm, and
/// therefore every trajectory, is reproducible bit-for-bit across runs.
/// The inverse transform is normalized (divides by n).
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    ~FftPlan() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(buf_);
    }

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<const cplx> in, std::span<cplx> out) {
        load(in);
        fftw_execute(fwd_);
        store(out, 1.0);
    }

    void inverse(std::span<const cplx> in, std::span<cplx> out) {
        load(in);
        fftw_execute(inv_);
        store(out, 1.0 / static_cast<double>(n_));
    }

    /// Forward transform, pointwise multiply by `mult`, inverse transform.
    void apply_multiplier(std::span<const cplx> in, std::span<const cplx> mult,
                          std::span<cplx> out) {
        load(in);
        fftw_execute(fwd_);
        const double scale = 1.0 / static_cast<double>(n_);
        auto* b = reinterpret_cast<cplx*>(buf_);
        for (std::size_t m = 0; m < n_; ++m) b[m] *= mult[m] * scale;
        fftw_execute(inv_);
        store(out, 1.0);
    }

private:
    void load(std::span<const cplx> in) {
        std::copy(in.begin(), in.end(), reinterpret_cast<cplx*>(buf_));
    }
    void store(std::span<cplx> out, double scale) {
        const auto* b = reinterpret_cast<const cplx*>(buf_);
        if (scale == 1.0) {
            std::copy(b, b + n_, out.begin());
        } else {
            for (std::size_t j = 0; j < n_; ++j) out[j] = b[j] * scale;
        }
    }

    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

/// Per-thread plan for length n. Plans are never shared between threads.
inline FftPlan& fft_plan(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlan>(n);
    return *slot;
}

} // namespace nlsh
