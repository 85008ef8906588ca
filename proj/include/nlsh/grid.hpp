#pragma once

#include "nlsh/errors.hpp"
#include "nlsh/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nlsh {

/// Periodic uniform grid on [x_left, x_right) with its Fourier metadata.
///
/// Wavenumbers are stored in FFT bin order: bins 0..n/2-1 hold
/// m = 0..n/2-1 and bins n/2..n-1 hold m = -n/2..-1, so bin n/2 is the
/// Nyquist mode. The first-derivative multiplier is zero at Nyquist, which
/// makes the discrete derivative exactly skew-Hermitian; the
/// second-derivative multiplier keeps -k^2 there.
class GridSpec {
public:
    GridSpec(double x_left, double x_right, std::size_t n)
        : x_left_(x_left), x_right_(x_right), n_(n) {
        if (!std::isfinite(x_left) || !std::isfinite(x_right) || !(x_right > x_left))
            throw InvalidArgument("grid requires finite x_left < x_right");
        if (n < 4 || n % 2 != 0)
            throw InvalidArgument("grid size must be even and >= 4, got " + std::to_string(n));

        dx_ = (x_right - x_left) / static_cast<double>(n);
        nodes_.resize(n);
        for (std::size_t j = 0; j < n; ++j) nodes_[j] = x_left + static_cast<double>(j) * dx_;

        const double k0 = 2.0 * std::numbers::pi / (x_right - x_left);
        wavenumbers_.resize(n);
        d1_.resize(n);
        d2_.resize(n);
        const auto half = static_cast<std::ptrdiff_t>(n / 2);
        for (std::size_t b = 0; b < n; ++b) {
            auto m = static_cast<std::ptrdiff_t>(b);
            if (m >= half) m -= static_cast<std::ptrdiff_t>(n);
            const double k = k0 * static_cast<double>(m);
            wavenumbers_[b] = k;
            d1_[b] = (m == -half) ? cplx{0.0, 0.0} : cplx{0.0, k};
            d2_[b] = cplx{-k * k, 0.0};
        }
    }

    double x_left() const noexcept { return x_left_; }
    double x_right() const noexcept { return x_right_; }
    double length() const noexcept { return x_right_ - x_left_; }
    std::size_t n() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> wavenumbers() const noexcept { return wavenumbers_; }
    /// Spectral multiplier of D (i*k, zero at Nyquist).
    std::span<const cplx> d1_multiplier() const noexcept { return d1_; }
    /// Spectral multiplier of D2 (-k^2).
    std::span<const cplx> d2_multiplier() const noexcept { return d2_; }
    std::size_t nyquist_bin() const noexcept { return n_ / 2; }

    friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
        return a.n_ == b.n_ && a.x_left_ == b.x_left_ && a.x_right_ == b.x_right_;
    }

private:
    double x_left_;
    double x_right_;
    std::size_t n_;
    double dx_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> wavenumbers_;
    std::vector<cplx> d1_;
    std::vector<cplx> d2_;
};

using GridPtr = std::shared_ptr<const GridSpec>;

inline GridPtr make_grid(double x_left, double x_right, std::size_t n) {
    return std::make_shared<const GridSpec>(x_left, x_right, n);
}

/// Complex samples on a GridSpec.
class ComplexField {
public:
    explicit ComplexField(GridPtr grid) : grid_(std::move(grid)) {
        if (!grid_) throw InvalidArgument("field requires a grid");
        values_.assign(grid_->n(), cplx{});
    }

    ComplexField(GridPtr grid, std::vector<cplx> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) throw InvalidArgument("field requires a grid");
        if (values_.size() != grid_->n())
            throw InvalidArgument("field has " + std::to_string(values_.size()) +
                                  " samples but grid has " + std::to_string(grid_->n()));
    }

    /// Samples `fn(x_j)` at every node.
    template <typename Fn>
    static ComplexField sample(GridPtr grid, Fn&& fn) {
        ComplexField f(std::move(grid));
        const auto x = f.grid().nodes();
        for (std::size_t j = 0; j < x.size(); ++j) f.values_[j] = cplx(fn(x[j]));
        return f;
    }

    const GridSpec& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<cplx> values() noexcept { return values_; }
    std::span<const cplx> values() const noexcept { return values_; }
    cplx& operator[](std::size_t j) noexcept { return values_[j]; }
    const cplx& operator[](std::size_t j) const noexcept { return values_[j]; }

    bool same_grid(const ComplexField& other) const noexcept {
        return grid_ == other.grid_ || *grid_ == *other.grid_;
    }
    void require_same_grid(const ComplexField& other) const {
        if (!same_grid(other)) throw GridMismatch();
    }

    void set_zero() noexcept { std::fill(values_.begin(), values_.end(), cplx{}); }

    /// this += a * x
    ComplexField& axpy(cplx a, const ComplexField& x) {
        require_same_grid(x);
        for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += a * x.values_[j];
        return *this;
    }

    ComplexField& operator+=(const ComplexField& x) { return axpy(1.0, x); }
    ComplexField& operator-=(const ComplexField& x) { return axpy(-1.0, x); }
    ComplexField& operator*=(cplx a) noexcept {
        for (auto& v : values_) v *= a;
        return *this;
    }

    bool all_finite() const noexcept {
        for (const auto& v : values_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

private:
    GridPtr grid_;
    std::vector<cplx> values_;
};

inline ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
inline ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
inline ComplexField operator*(cplx s, ComplexField a) { return a *= s; }

inline void apply_fourier_multiplier(const ComplexField& f, std::span<const cplx> mult,
                                     ComplexField& out) {
    f.require_same_grid(out);
    fft_plan(f.size()).apply_multiplier(f.values(), mult, out.values());
}

inline void first_derivative(const ComplexField& f, ComplexField& out) {
    apply_fourier_multiplier(f, f.grid().d1_multiplier(), out);
}

/// D f with the Nyquist-zeroed spectral first derivative.
inline ComplexField first_derivative(const ComplexField& f) {
    ComplexField out(f.grid_ptr());
    first_derivative(f, out);
    return out;
}

inline void second_derivative(const ComplexField& f, ComplexField& out) {
    apply_fourier_multiplier(f, f.grid().d2_multiplier(), out);
}

inline ComplexField second_derivative(const ComplexField& f) {
    ComplexField out(f.grid_ptr());
    second_derivative(f, out);
    return out;
}

/// Zeroes every Fourier mode with |m| > n/3 (2/3-rule dealiasing).
inline void dealias_two_thirds(ComplexField& f) {
    const std::size_t n = f.size();
    std::vector<cplx> mask(n, cplx{1.0, 0.0});
    const auto cutoff = static_cast<std::ptrdiff_t>(n / 3);
    for (std::size_t b = 0; b < n; ++b) {
        auto m = static_cast<std::ptrdiff_t>(b);
        if (m >= static_cast<std::ptrdiff_t>(n / 2)) m -= static_cast<std::ptrdiff_t>(n);
        if (std::abs(m) > cutoff) mask[b] = 0.0;
    }
    fft_plan(n).apply_multiplier(f.values(), mask, f.values());
}

/// Rectangle rule dx * sum f_j.
inline cplx quadrature(const ComplexField& f) {
    cplx s{};
    for (const auto& v : f.values()) s += v;
    return s * f.grid().dx();
}

/// Discrete inner product <a, b> = dx * sum conj(a_j) b_j.
inline cplx inner(const ComplexField& a, const ComplexField& b) {
    a.require_same_grid(b);
    cplx s{};
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t j = 0; j < av.size(); ++j) s += std::conj(av[j]) * bv[j];
    return s * a.grid().dx();
}

enum class NormConvention { weighted, unweighted };

/// Weighted: sqrt(dx * sum |f|^2). Unweighted: sqrt(sum |f|^2).
inline double norm_l2(const ComplexField& f, NormConvention conv = NormConvention::weighted) {
    double s = 0.0;
    for (const auto& v : f.values()) s += std::norm(v);
    if (conv == NormConvention::weighted) s *= f.grid().dx();
    return std::sqrt(s);
}

inline double norm_max(const ComplexField& f) {
    double m = 0.0;
    for (const auto& v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

} // namespace nlsh
