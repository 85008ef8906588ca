#pragma once

#include "nlsh/errors.hpp"
#include "nlsh/grid.hpp"
#include "nlsh/models.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace nlsh {

struct NLSInvariants {
    double mass = 0.0;        // I1 = -int |u|^2
    cplx momentum{};          // I2 = -i int conj(u) u_x
    double hamiltonian = 0.0; // H = int |u_x|^2 - kappa/2 |u|^4
    double hamiltonian_imag = 0.0;
};

struct NLSHInvariants {
    double mass = 0.0;        // Ibar1 = -int |q0|^2 + tau |q1|^2
    cplx momentum{};          // Ibar2 = -i int conj(q0) D q0 + tau conj(q1) D q1
    double hamiltonian = 0.0; // Hbar = int conj(q1) D q0 + q1 conj(D q0) - |q1|^2 - kappa/2 |q0|^4
    double hamiltonian_imag = 0.0;
};

inline NLSInvariants nls_invariants(const ComplexField& u, const NLSParams& p) {
    const ComplexField ux = first_derivative(u);
    const double dx = u.grid().dx();
    double mass = 0.0;
    cplx mom{};
    cplx ham{};
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double a2 = std::norm(u[j]);
        mass += a2;
        mom += std::conj(u[j]) * ux[j];
        ham += std::norm(ux[j]) - 0.5 * p.kappa * a2 * a2;
    }
    return {-mass * dx, cplx{0.0, -1.0} * mom * dx, ham.real() * dx, ham.imag() * dx};
}

inline NLSHInvariants nlsh_invariants(const NLSHState& q, const NLSHParams& p) {
    const ComplexField d0 = first_derivative(q.q0);
    const ComplexField d1 = first_derivative(q.q1);
    const double dx = q.q0.grid().dx();
    double mass = 0.0;
    cplx mom{};
    cplx ham{};
    for (std::size_t j = 0; j < q.q0.size(); ++j) {
        const cplx a = q.q0[j];
        const cplx b = q.q1[j];
        mass += std::norm(a) + p.tau * std::norm(b);
        mom += std::conj(a) * d0[j] + p.tau * std::conj(b) * d1[j];
        const double a2 = std::norm(a);
        ham += std::conj(b) * d0[j] + b * std::conj(d0[j]) - std::norm(b) - 0.5 * p.kappa * a2 * a2;
    }
    return {-mass * dx, cplx{0.0, -1.0} * mom * dx, ham.real() * dx, ham.imag() * dx};
}

/// Density and velocity of u = sqrt(rho) exp(i theta): rho = |u|^2 and
/// phi = theta_x = Im(conj(u) u_x) / max(rho, rho_floor).
struct HydroVars {
    std::vector<double> rho;
    std::vector<double> phi;
};

inline HydroVars hydro_transform(const ComplexField& u, double rho_floor = 1e-12) {
    const ComplexField ux = first_derivative(u);
    HydroVars h;
    h.rho.resize(u.size());
    h.phi.resize(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double rho = std::norm(u[j]);
        h.rho[j] = rho;
        h.phi[j] = (std::conj(u[j]) * ux[j]).imag() / std::max(rho, rho_floor);
    }
    return h;
}

/// (||u - q0||, ||D u - q1||) between an NLS and an NLSH solution.
inline std::pair<double, double> hyperbolization_error(const ComplexField& u, const NLSHState& q,
                                                       NormConvention conv = NormConvention::weighted) {
    u.require_same_grid(q.q0);
    ComplexField e0 = u - q.q0;
    ComplexField e1 = first_derivative(u) - q.q1;
    return {norm_l2(e0, conv), norm_l2(e1, conv)};
}

/// Estimated order of convergence between consecutive (parameter, error)
/// pairs: log(e_{i-1}/e_i) / log(p_{i-1}/p_i). Entries whose errors are not
/// both positive and finite are empty.
inline std::vector<std::optional<double>> eoc(const std::vector<std::pair<double, double>>& errors) {
    std::vector<std::optional<double>> out;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        const auto [p0, e0] = errors[i - 1];
        const auto [p1, e1] = errors[i];
        if (!(p1 < p0) || !(p1 > 0.0))
            throw InvalidArgument("eoc requires a strictly decreasing positive parameter sequence");
        if (e0 > 0.0 && e1 > 0.0 && std::isfinite(e0) && std::isfinite(e1))
            out.emplace_back(std::log(e0 / e1) / std::log(p0 / p1));
        else
            out.emplace_back(std::nullopt);
    }
    return out;
}

/// Least-squares slope of log(err) against log(param).
inline double fitted_slope(const std::vector<std::pair<double, double>>& pts) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (auto [p, e] : pts) {
        const double x = std::log(p), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// One sample of a trajectory's invariants.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    cplx momentum{};
    double hamiltonian = 0.0;
    double gamma = 1.0;
};

inline DiagnosticsRecord diagnose(const NLSHModel& m, const NLSHState& q, double t, double gamma) {
    const auto inv = nlsh_invariants(q, m.params());
    return {t, inv.mass, inv.momentum, inv.hamiltonian, gamma};
}

inline DiagnosticsRecord diagnose(const NLSModel& m, const NLSState& s, double t, double gamma) {
    const auto inv = nls_invariants(s.u, m.params());
    return {t, inv.mass, inv.momentum, inv.hamiltonian, gamma};
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& recs) {
    os << "t,mass,momentum_re,momentum_im,hamiltonian,gamma\n";
    char buf[256];
    for (const auto& r : recs) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mass,
                      r.momentum.real(), r.momentum.imag(), r.hamiltonian, r.gamma);
        os << buf;
    }
}

} // namespace nlsh
