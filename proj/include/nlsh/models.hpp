#pragma once

#include "nlsh/errors.hpp"
#include "nlsh/grid.hpp"

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

namespace nlsh {

struct NLSParams {
    double kappa = 0.0;
};

struct NLSHParams {
    double kappa = 0.0;
    double tau = 1.0;

    void validate() const {
        if (!std::isfinite(kappa)) throw InvalidArgument("kappa must be finite");
        if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be > 0");
    }
};

struct NLSState {
    ComplexField u;

    explicit NLSState(ComplexField field) : u(std::move(field)) {}

    const GridPtr& grid_ptr() const noexcept { return u.grid_ptr(); }
    NLSState& axpy(double a, const NLSState& x) {
        u.axpy(a, x.u);
        return *this;
    }
    void set_zero() noexcept { u.set_zero(); }
    bool all_finite() const noexcept { return u.all_finite(); }
};

struct NLSHState {
    ComplexField q0;
    ComplexField q1;

    NLSHState(ComplexField a, ComplexField b) : q0(std::move(a)), q1(std::move(b)) {
        q0.require_same_grid(q1);
    }
    explicit NLSHState(const GridPtr& grid) : q0(grid), q1(grid) {}

    const GridPtr& grid_ptr() const noexcept { return q0.grid_ptr(); }
    NLSHState& axpy(double a, const NLSHState& x) {
        q0.axpy(a, x.q0);
        q1.axpy(a, x.q1);
        return *this;
    }
    void set_zero() noexcept {
        q0.set_zero();
        q1.set_zero();
    }
    bool all_finite() const noexcept { return q0.all_finite() && q1.all_finite(); }
};

/// Semidiscrete NLSH with the stiff linear part treated implicitly:
///   f(Q) = (i kappa |q0|^2 q0, 0)
///   g(Q) = (i D q1, -i/tau (D q0 - q1))
class NLSHModel {
public:
    using State = NLSHState;

    explicit NLSHModel(NLSHParams p, bool dealias = false) : p_(p), dealias_(dealias) {
        p_.validate();
    }

    const NLSHParams& params() const noexcept { return p_; }
    bool dealias() const noexcept { return dealias_; }

    void explicit_rhs(const State& q, State& out) const {
        const auto a = q.q0.values();
        auto o = out.q0.values();
        for (std::size_t j = 0; j < a.size(); ++j) o[j] = cplx(0.0, p_.kappa * std::norm(a[j])) * a[j];
        if (dealias_) dealias_two_thirds(out.q0);
        out.q1.set_zero();
    }

    void implicit_rhs(const State& q, State& out) const {
        first_derivative(q.q1, out.q0);
        first_derivative(q.q0, out.q1);
        const cplx i{0.0, 1.0};
        for (auto& v : out.q0.values()) v *= i;
        const auto q1 = q.q1.values();
        auto o1 = out.q1.values();
        for (std::size_t j = 0; j < o1.size(); ++j) o1[j] = -i / p_.tau * (o1[j] - q1[j]);
    }

    /// Solves Q - alpha g(Q) = R exactly, one 2x2 block per Fourier mode.
    ///
    /// With d the D-multiplier of a mode (i k, zero at Nyquist) the block,
    /// scaled by tau, reads
    ///   [ tau        -i alpha d tau ] [q0]   [tau r0]
    ///   [ i alpha d  tau - i alpha  ] [q1] = [tau r1]
    /// whose determinant tau - i alpha - alpha^2 d^2 stays bounded away
    /// from zero for alpha >= 0, tau > 0.
    void implicit_solve(const State& r, double alpha, State& out) const {
        if (alpha < 0.0) throw InvalidArgument("implicit solve requires alpha >= 0");
        if (alpha == 0.0) {
            out = r;
            return;
        }
        const auto& grid = r.q0.grid();
        const std::size_t n = grid.n();
        auto& fft = fft_plan(n);
        hat0_.resize(n);
        hat1_.resize(n);
        fft.forward(r.q0.values(), hat0_);
        fft.forward(r.q1.values(), hat1_);

        const auto d1 = grid.d1_multiplier();
        const double tau = p_.tau;
        const cplx i{0.0, 1.0};
        for (std::size_t m = 0; m < n; ++m) {
            const cplx d = d1[m];
            const cplx det = tau - i * alpha - alpha * alpha * d * d;
            if (std::abs(det) < 1e-14 * std::max(tau, alpha))
                throw SingularBlock("singular implicit block at bin " + std::to_string(m));
            const cplx r0 = hat0_[m];
            const cplx r1 = hat1_[m];
            hat0_[m] = ((tau - i * alpha) * r0 + i * alpha * tau * d * r1) / det;
            hat1_[m] = (tau * r1 - i * alpha * d * r0) / det;
        }
        fft.inverse(hat0_, out.q0.values());
        fft.inverse(hat1_, out.q1.values());
    }

    /// Re <a, b> in the modified-mass inner product (q0 part plus tau q1 part).
    double mass_inner(const State& a, const State& b) const {
        return inner(a.q0, b.q0).real() + p_.tau * inner(a.q1, b.q1).real();
    }

private:
    NLSHParams p_;
    bool dealias_;
    mutable std::vector<cplx> hat0_;
    mutable std::vector<cplx> hat1_;
};

/// Semidiscrete NLS: f(u) = i kappa |u|^2 u explicit, g(u) = i D2 u implicit.
class NLSModel {
public:
    using State = NLSState;

    explicit NLSModel(NLSParams p, bool dealias = false) : p_(p), dealias_(dealias) {}

    const NLSParams& params() const noexcept { return p_; }

    void explicit_rhs(const State& s, State& out) const {
        const auto a = s.u.values();
        auto o = out.u.values();
        for (std::size_t j = 0; j < a.size(); ++j) o[j] = cplx(0.0, p_.kappa * std::norm(a[j])) * a[j];
        if (dealias_) dealias_two_thirds(out.u);
    }

    void implicit_rhs(const State& s, State& out) const {
        second_derivative(s.u, out.u);
        out.u *= cplx{0.0, 1.0};
    }

    /// u_hat = r_hat / (1 + i alpha k^2), i.e. (I - alpha g)^{-1} r.
    void implicit_solve(const State& r, double alpha, State& out) const {
        if (alpha < 0.0) throw InvalidArgument("implicit solve requires alpha >= 0");
        if (alpha == 0.0) {
            out = r;
            return;
        }
        const auto& grid = r.u.grid();
        const auto d2 = grid.d2_multiplier();
        mult_.resize(grid.n());
        for (std::size_t m = 0; m < mult_.size(); ++m) mult_[m] = 1.0 / (1.0 - cplx{0.0, alpha} * d2[m]);
        apply_fourier_multiplier(r.u, mult_, out.u);
    }

    double mass_inner(const State& a, const State& b) const { return inner(a.u, b.u).real(); }

private:
    NLSParams p_;
    bool dealias_;
    mutable std::vector<cplx> mult_;
};

// Pure-function forms.

inline NLSHState nlsh_explicit_rhs(const NLSHState& q, const NLSHParams& p) {
    NLSHState out(q.grid_ptr());
    NLSHModel(p).explicit_rhs(q, out);
    return out;
}

inline NLSHState nlsh_implicit_rhs(const NLSHState& q, const NLSHParams& p) {
    NLSHState out(q.grid_ptr());
    NLSHModel(p).implicit_rhs(q, out);
    return out;
}

inline NLSHState nlsh_implicit_solve(const NLSHState& r, double alpha, const NLSHParams& p) {
    NLSHState out(r.grid_ptr());
    NLSHModel(p).implicit_solve(r, alpha, out);
    return out;
}

inline ComplexField nls_explicit_rhs(const ComplexField& u, const NLSParams& p) {
    NLSState out{ComplexField(u.grid_ptr())};
    NLSModel(p).explicit_rhs(NLSState{u}, out);
    return std::move(out.u);
}

inline ComplexField nls_implicit_rhs(const ComplexField& u, const NLSParams& p = {}) {
    NLSState out{ComplexField(u.grid_ptr())};
    NLSModel(p).implicit_rhs(NLSState{u}, out);
    return std::move(out.u);
}

inline ComplexField nls_implicit_solve(const ComplexField& r, double alpha) {
    NLSState out{ComplexField(r.grid_ptr())};
    NLSModel({}).implicit_solve(NLSState{r}, alpha, out);
    return std::move(out.u);
}

/// Well-prepared NLSH data: (u0, D u0).
inline NLSHState well_prepared_init(const ComplexField& u0) {
    return NLSHState(u0, first_derivative(u0));
}

/// Characteristic speeds of the hyperbolic part, the eigenvalues of A^{-1}B.
inline std::pair<double, double> hyperbolic_speeds(const NLSHParams& p) {
    if (!(p.tau > 0.0)) throw InvalidArgument("tau must be > 0");
    const double c = std::sqrt(1.0 / p.tau);
    return {-c, c};
}

} // namespace nlsh
