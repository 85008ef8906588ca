#pragma once

#include "nlsh/errors.hpp"
#include "nlsh/grid.hpp"
#include "nlsh/models.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace nlsh {

enum class Branch { plus, minus };

inline double sign_of(Branch b) noexcept { return b == Branch::plus ? 1.0 : -1.0; }

/// Standing-wave parameters. tau = 0 selects the NLS limit.
///
/// `branch` picks the sign of the x coefficient in the tanh/sech argument;
/// `k_const` is the signed phase shift (K0 for fronts, K1 for solitary waves).
struct StandingWaveParams {
    double mu = 1.0;
    double kappa = 1.0;
    double tau = 0.0;
    Branch branch = Branch::plus;
    double k_const = 0.0;
    /// Enables the focusing front with mu*tau > 1, which has no NLS limit.
    bool allow_focusing_front = false;

    double sigma() const {
        if (!(mu * kappa > 0.0)) throw InvalidArgument("standing waves require mu*kappa > 0");
        return std::sqrt(mu / kappa);
    }
};

namespace detail {

inline double sech(double z) { return 1.0 / std::cosh(z); }

inline void require_solitary(const StandingWaveParams& p) {
    if (!(p.mu > 0.0 && p.kappa > 0.0))
        throw InvalidArgument("solitary wave requires mu > 0 and kappa > 0");
    if (!(p.tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
    if (!(p.mu * p.tau < 1.0)) throw InvalidArgument("solitary wave requires mu*tau < 1");
}

inline void require_front(const StandingWaveParams& p) {
    if (!(p.tau >= 0.0)) throw InvalidArgument("tau must be >= 0");
    const bool defocusing = p.mu < 0.0 && p.kappa < 0.0;
    const bool focusing_hyperbolic =
        p.allow_focusing_front && p.mu > 0.0 && p.kappa > 0.0 && p.mu * p.tau > 1.0;
    if (!defocusing && !focusing_hyperbolic)
        throw InvalidArgument(p.allow_focusing_front
                                  ? "front requires mu, kappa < 0, or mu, kappa > 0 with mu*tau > 1"
                                  : "front requires mu < 0 and kappa < 0");
}

} // namespace detail

/// NLS amplitude u^+ (mu, kappa > 0) or u^- (mu, kappa < 0).
inline double nls_ground_state(double x, const StandingWaveParams& p) {
    const double s = sign_of(p.branch);
    if (p.mu > 0.0 && p.kappa > 0.0)
        return std::sqrt(2.0) * p.sigma() * detail::sech(s * std::sqrt(p.mu) * x + p.k_const);
    if (p.mu < 0.0 && p.kappa < 0.0) {
        const double sig = p.sigma();
        return sig * std::tanh(s * sig * std::sqrt(-p.kappa / 2.0) * x + p.k_const);
    }
    throw InvalidArgument("ground state requires mu and kappa of equal, nonzero sign");
}

/// Analytic x-derivative of nls_ground_state.
inline double nls_ground_state_dx(double x, const StandingWaveParams& p) {
    const double s = sign_of(p.branch);
    if (p.mu > 0.0 && p.kappa > 0.0) {
        const double a = s * std::sqrt(p.mu);
        const double z = a * x + p.k_const;
        return -std::sqrt(2.0) * p.sigma() * a * detail::sech(z) * std::tanh(z);
    }
    if (p.mu < 0.0 && p.kappa < 0.0) {
        const double sig = p.sigma();
        const double a = s * sig * std::sqrt(-p.kappa / 2.0);
        const double sh = detail::sech(a * x + p.k_const);
        return sig * a * sh * sh;
    }
    throw InvalidArgument("ground state requires mu and kappa of equal, nonzero sign");
}

/// Bright NLSH standing-wave amplitude (q0, q1).
inline std::pair<double, double> nlsh_solitary(double x, const StandingWaveParams& p) {
    detail::require_solitary(p);
    const double sig = p.sigma();
    const double one_m = 1.0 - p.mu * p.tau;
    const double a = sign_of(p.branch) * std::sqrt(p.mu * one_m);
    const double z = a * x + p.k_const;
    const double sh = detail::sech(z);
    const double q0 = std::sqrt(2.0) * sig * sh;
    // q1 = q0' / (1 - mu tau)
    const double q1 = -std::sqrt(2.0) * sig * a * sh * std::tanh(z) / one_m;
    return {q0, q1};
}

/// Dark NLSH front amplitude (q0, q1).
inline std::pair<double, double> nlsh_front(double x, const StandingWaveParams& p) {
    detail::require_front(p);
    const double sig = p.sigma();
    const double one_m = 1.0 - p.mu * p.tau;
    const double a = sign_of(p.branch) * sig * std::sqrt(p.kappa * (p.mu * p.tau - 1.0) / 2.0);
    const double z = a * x + p.k_const;
    const double sh = detail::sech(z);
    return {sig * std::tanh(z), sig * a * sh * sh / one_m};
}

/// K0 such that the front passes through u0 at x = 0.
inline double front_k_const(double u0, const StandingWaveParams& p) {
    const double sig = p.sigma();
    if (!(std::abs(u0) < sig)) throw InvalidArgument("front requires |u(0)| < sigma");
    return std::atanh(u0 / sig);
}

/// K1 >= 0 such that the solitary wave passes through u0 at x = 0.
inline double solitary_k_const(double u0, const StandingWaveParams& p) {
    const double peak = std::sqrt(2.0) * p.sigma();
    if (!(u0 > 0.0 && u0 <= peak)) throw InvalidArgument("solitary wave requires 0 < u(0) <= sqrt(2) sigma");
    return std::acosh(peak / u0);
}

/// Samples an amplitude pair on a grid as an NLSH state.
template <typename Profile>
NLSHState sample_standing_wave(const GridPtr& grid, Profile&& profile) {
    NLSHState q(grid);
    const auto x = grid->nodes();
    for (std::size_t j = 0; j < x.size(); ++j) {
        const auto [a, b] = profile(x[j]);
        q.q0[j] = a;
        q.q1[j] = b;
    }
    return q;
}

/// e^{i mu t} times both components.
inline NLSHState rotate_in_time(NLSHState q, double mu, double t) {
    const cplx r = std::polar(1.0, mu * t);
    q.q0 *= r;
    q.q1 *= r;
    return q;
}

inline ComplexField rotate_in_time(ComplexField u, double mu, double t) {
    u *= std::polar(1.0, mu * t);
    return u;
}

/// q0' = (1 - mu tau) q1, q1' = (mu - kappa q0^2) q0.
inline std::pair<double, double> standing_wave_rhs(std::pair<double, double> q, const StandingWaveParams& p) {
    const auto [q0, q1] = q;
    return {(1.0 - p.mu * p.tau) * q1, (p.mu - p.kappa * q0 * q0) * q0};
}

/// (1 - mu tau) q1^2 - mu q0^2 + kappa/2 q0^4, constant along orbits.
inline double first_integral(std::pair<double, double> q, const StandingWaveParams& p) {
    const auto [q0, q1] = q;
    return (1.0 - p.mu * p.tau) * q1 * q1 - p.mu * q0 * q0 + 0.5 * p.kappa * q0 * q0 * q0 * q0;
}

enum class EquilibriumKind { saddle, center, degenerate };

inline const char* to_string(EquilibriumKind k) noexcept {
    switch (k) {
    case EquilibriumKind::saddle: return "saddle";
    case EquilibriumKind::center: return "center";
    default: return "degenerate";
    }
}

struct Equilibrium {
    std::pair<double, double> point;
    std::array<cplx, 2> eigenvalues;
    EquilibriumKind kind;
};

/// The equilibria (-sigma, 0), (0, 0), (sigma, 0) with Jacobian eigenvalues
/// +-sqrt((mu - 3 kappa q0^2)(1 - tau mu)).
inline std::vector<Equilibrium> equilibria_and_eigenvalues(const StandingWaveParams& p) {
    const double sig = p.sigma();
    std::vector<Equilibrium> out;
    for (double q0 : {-sig, 0.0, sig}) {
        const double prod = (p.mu - 3.0 * p.kappa * q0 * q0) * (1.0 - p.tau * p.mu);
        const cplx lam = std::sqrt(cplx(prod, 0.0));
        EquilibriumKind kind = EquilibriumKind::degenerate;
        if (prod > 0.0) kind = EquilibriumKind::saddle;
        else if (prod < 0.0) kind = EquilibriumKind::center;
        out.push_back({{q0, 0.0}, {lam, -lam}, kind});
    }
    return out;
}

/// Classical RK4 for the standing-wave ODE in x.
inline std::pair<double, double> rk4_standing_wave(std::pair<double, double> q, double h,
                                                   const StandingWaveParams& p) {
    auto add = [](std::pair<double, double> a, std::pair<double, double> k, double s) {
        return std::pair{a.first + s * k.first, a.second + s * k.second};
    };
    const auto k1 = standing_wave_rhs(q, p);
    const auto k2 = standing_wave_rhs(add(q, k1, h / 2), p);
    const auto k3 = standing_wave_rhs(add(q, k2, h / 2), p);
    const auto k4 = standing_wave_rhs(add(q, k3, h), p);
    return {q.first + h / 6 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first),
            q.second + h / 6 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second)};
}

struct VectorFieldSample {
    double q0, q1, dq0, dq1;
};

struct OrbitPoint {
    std::size_t orbit;
    double s;
    double q0, q1;
    double first_integral;
};

struct PhasePortrait {
    std::vector<VectorFieldSample> field;
    std::vector<OrbitPoint> orbits;
};

/// Vector field on [-extent, extent]^2 with `n_grid` points per axis, plus
/// orbits leaving every saddle along its unstable directions and a few
/// closed orbits around every center.
inline PhasePortrait phase_portrait(const StandingWaveParams& p, double extent, std::size_t n_grid,
                                    double s_max, double h = 1e-3) {
    if (n_grid < 2 || !(extent > 0.0) || !(s_max > 0.0) || !(h > 0.0))
        throw InvalidArgument("phase portrait requires n_grid >= 2 and positive extent, s_max, h");
    PhasePortrait out;
    for (std::size_t i = 0; i < n_grid; ++i) {
        for (std::size_t j = 0; j < n_grid; ++j) {
            const double a = -extent + 2.0 * extent * static_cast<double>(i) / static_cast<double>(n_grid - 1);
            const double b = -extent + 2.0 * extent * static_cast<double>(j) / static_cast<double>(n_grid - 1);
            const auto [da, db] = standing_wave_rhs({a, b}, p);
            out.field.push_back({a, b, da, db});
        }
    }

    std::size_t id = 0;
    auto trace = [&](std::pair<double, double> q) {
        const std::size_t steps = static_cast<std::size_t>(std::ceil(s_max / h));
        for (std::size_t k = 0; k <= steps; ++k) {
            if (k % 10 == 0) out.orbits.push_back({id, static_cast<double>(k) * h, q.first, q.second,
                                                   first_integral(q, p)});
            if (std::abs(q.first) > 4.0 * extent || std::abs(q.second) > 4.0 * extent) break;
            q = rk4_standing_wave(q, h, p);
        }
        ++id;
    };

    const double one_m = 1.0 - p.mu * p.tau;
    const double eps = 1e-6 * std::max(1.0, p.sigma());
    for (const auto& e : equilibria_and_eigenvalues(p)) {
        const auto [x0, y0] = e.point;
        if (e.kind == EquilibriumKind::saddle) {
            // unstable eigenvector of [[0, 1 - mu tau], [mu - 3 kappa x0^2, 0]]: (one_m, lambda)
            const double lam = e.eigenvalues[0].real();
            const double nrm = std::hypot(one_m, lam);
            for (double s : {1.0, -1.0})
                trace({x0 + s * eps * one_m / nrm, y0 + s * eps * lam / nrm});
        } else if (e.kind == EquilibriumKind::center) {
            for (double r : {0.25, 0.5})
                trace({x0 + r * p.sigma() * (x0 == 0.0 ? 1.0 : -x0 / std::abs(x0)) * 0.5, y0});
        }
    }
    return out;
}

} // namespace nlsh
