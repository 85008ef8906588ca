#pragma once

#include "nlsh/diagnostics.hpp"
#include "nlsh/errors.hpp"
#include "nlsh/exact.hpp"
#include "nlsh/grid.hpp"
#include "nlsh/integrator.hpp"
#include "nlsh/models.hpp"
#include "nlsh/tableau.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace nlsh {

enum class ExperimentKind { ap_study, aa_study, relaxation_study, riemann, bound_state, phase_portrait };
enum class Scale { desk, paper };

inline const char* to_string(ExperimentKind k) noexcept {
    switch (k) {
    case ExperimentKind::ap_study: return "ap_study";
    case ExperimentKind::aa_study: return "aa_study";
    case ExperimentKind::relaxation_study: return "relaxation_study";
    case ExperimentKind::riemann: return "riemann";
    case ExperimentKind::bound_state: return "bound_state";
    default: return "phase_portrait";
    }
}

inline ExperimentKind parse_experiment(const std::string& s) {
    for (auto k : {ExperimentKind::ap_study, ExperimentKind::aa_study, ExperimentKind::relaxation_study,
                   ExperimentKind::riemann, ExperimentKind::bound_state, ExperimentKind::phase_portrait})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown experiment '" + s +
                      "' (expected ap_study, aa_study, relaxation_study, riemann, bound_state, phase_portrait)");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
    const std::string s = trim(v);
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(d))
        throw ConfigError("key '" + key + "': expected a real number, got '" + v + "'");
    return d;
}

inline std::size_t parse_size(const std::string& key, const std::string& v) {
    const double d = parse_real(key, v);
    if (d < 0 || d != std::floor(d) || d > 1e12)
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    const std::string s = trim(v);
    if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
    if (s == "off" || s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("key '" + key + "': expected on/off, got '" + v + "'");
}

/// Splits on commas outside parentheses/brackets, so method names such as
/// ARS(4,4,3) survive as one item.
inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    int depth = 0;
    auto flush = [&] {
        if (auto t = trim(item); !t.empty()) out.push_back(t);
        item.clear();
    };
    for (char ch : v) {
        if (ch == '(' || ch == '[') ++depth;
        if (ch == ')' || ch == ']') --depth;
        if (ch == ',' && depth <= 0) flush();
        else item += ch;
    }
    flush();
    return out;
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(parse_real(key, s));
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

inline std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

} // namespace detail

/// Flat experiment configuration. Keys mirror the field names; see README.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::ap_study;
    Scale scale = Scale::desk;
    std::string method = "ARS(4,4,3)";
    std::vector<std::string> methods;
    double x_left = -16.0;
    double x_right = 16.0;
    std::size_t n = 2048;
    double dt = 1e-3;
    std::vector<double> dt_list;
    double t_end = 5.0;
    double kappa = 8.0;
    double mu = 3.0;
    double k_const = 0.0;
    std::vector<double> tau_list;
    bool relaxation = false;
    NormConvention norm = NormConvention::weighted;
    std::string output_dir = ".";
    bool refine_dt = true;
    std::size_t refine_max = 3;
    std::size_t sample_every = 20;
    bool dealias = false;
    // riemann
    double rho_left = 2.0;
    double rho_right = 1.0;
    double step_sharpness = 100.0;
    /// Width of the tanh steps joining rho_right back to rho_left at the
    /// periodic boundary; 0 leaves the jump at the domain edge.
    double wrap_width = 0.0;
    double window_left = -200.0;
    double window_right = 200.0;
    // phase portrait
    double tau = 1e-3;
    double extent = 2.0;
    std::size_t n_grid = 21;
    double s_max = 20.0;

    /// Defaults for one experiment at one scale.
    static ExperimentConfig defaults(ExperimentKind kind, Scale scale = Scale::desk) {
        ExperimentConfig c;
        c.experiment = kind;
        c.scale = scale;
        switch (kind) {
        case ExperimentKind::ap_study:
            c.tau_list = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
            break;
        case ExperimentKind::aa_study:
            c.methods = {"AGSA(3,4,2)", "SSP3-ImEx(3,4,3)", "ARK3(2)4L[2]SA", "ARS(4,4,3)"};
            c.x_left = -5.0 * std::numbers::pi;
            c.x_right = 5.0 * std::numbers::pi;
            c.kappa = 1.0;
            c.mu = 3.0;
            c.tau_list = {1e-2, 1e-5};
            for (int k = 0; k < 8; ++k) c.dt_list.push_back(0.02 * std::pow(2.0, -0.5 * k));
            break;
        case ExperimentKind::relaxation_study:
            c.x_left = -5.0 * std::numbers::pi;
            c.x_right = 5.0 * std::numbers::pi;
            c.n = 1024;
            c.dt = 5e-3;
            c.t_end = 10.0;
            c.kappa = 1.0;
            c.mu = 3.0;
            c.tau_list = {1e-1, 1e-2, 1e-3, 1e-4};
            break;
        case ExperimentKind::riemann:
            c.kappa = -1.0;
            c.tau_list = {1e-2, 1e-3, 1e-4};
            if (scale == Scale::paper) {
                c.x_left = -1600.0;
                c.x_right = 1600.0;
                c.n = 16384;
                c.dt = 1e-4;
                c.t_end = 70.0;
                c.window_left = -335.0;
                c.window_right = 335.0;
            } else {
                c.x_left = -200.0;
                c.x_right = 200.0;
                c.n = 2048;
                c.dt = 1e-3;
                c.t_end = 20.0;
            }
            break;
        case ExperimentKind::bound_state:
            c.tau_list = {1e-2, 1e-3, 1e-4};
            break;
        case ExperimentKind::phase_portrait:
            c.kappa = 1.0;
            c.mu = 1.0;
            break;
        }
        return c;
    }

    /// Applies one key=value pair.
    void set(const std::string& key, const std::string& value) {
        using namespace detail;
        const std::string v = trim(value);
        if (key == "experiment") experiment = parse_experiment(v);
        else if (key == "scale") {
            if (v == "desk") scale = Scale::desk;
            else if (v == "paper") scale = Scale::paper;
            else throw ConfigError("key 'scale': expected desk or paper, got '" + v + "'");
        }
        else if (key == "method") method = v;
        else if (key == "methods") methods = split_list(v);
        else if (key == "x_left") x_left = parse_real(key, v);
        else if (key == "x_right") x_right = parse_real(key, v);
        else if (key == "domain") {
            const auto d = parse_real_list(key, v);
            if (d.size() != 2) throw ConfigError("key 'domain': expected x_left,x_right");
            x_left = d[0];
            x_right = d[1];
        }
        else if (key == "n") n = parse_size(key, v);
        else if (key == "dt") dt = parse_real(key, v);
        else if (key == "dt_list") dt_list = parse_real_list(key, v);
        else if (key == "t_end") t_end = parse_real(key, v);
        else if (key == "kappa") kappa = parse_real(key, v);
        else if (key == "mu") mu = parse_real(key, v);
        else if (key == "k_const") k_const = parse_real(key, v);
        else if (key == "tau_list") tau_list = parse_real_list(key, v);
        else if (key == "tau") tau = parse_real(key, v);
        else if (key == "relaxation") relaxation = parse_bool(key, v);
        else if (key == "norm") {
            if (v == "weighted") norm = NormConvention::weighted;
            else if (v == "unweighted") norm = NormConvention::unweighted;
            else throw ConfigError("key 'norm': expected weighted or unweighted, got '" + v + "'");
        }
        else if (key == "output_dir") output_dir = v;
        else if (key == "refine_dt") refine_dt = parse_bool(key, v);
        else if (key == "refine_max") refine_max = parse_size(key, v);
        else if (key == "sample_every") sample_every = parse_size(key, v);
        else if (key == "dealias") dealias = parse_bool(key, v);
        else if (key == "rho_left") rho_left = parse_real(key, v);
        else if (key == "rho_right") rho_right = parse_real(key, v);
        else if (key == "step_sharpness") step_sharpness = parse_real(key, v);
        else if (key == "wrap_width") wrap_width = parse_real(key, v);
        else if (key == "window") {
            const auto w = parse_real_list(key, v);
            if (w.size() != 2) throw ConfigError("key 'window': expected left,right");
            window_left = w[0];
            window_right = w[1];
        }
        else if (key == "extent") extent = parse_real(key, v);
        else if (key == "n_grid") n_grid = parse_size(key, v);
        else if (key == "s_max") s_max = parse_real(key, v);
        else throw ConfigError("unknown config key '" + key + "'");
    }

    /// Key/value pairs in a canonical order, as written to CSV headers.
    std::vector<std::pair<std::string, std::string>> entries() const {
        using detail::fmt;
        using detail::join;
        std::vector<std::pair<std::string, std::string>> e = {
            {"experiment", to_string(experiment)},
            {"scale", scale == Scale::paper ? "paper" : "desk"},
            {"method", method},
            {"methods", join(methods)},
            {"domain", fmt(x_left) + "," + fmt(x_right)},
            {"n", std::to_string(n)},
            {"dt", fmt(dt)},
            {"dt_list", join(dt_list)},
            {"t_end", fmt(t_end)},
            {"kappa", fmt(kappa)},
            {"mu", fmt(mu)},
            {"k_const", fmt(k_const)},
            {"tau_list", join(tau_list)},
            {"tau", fmt(tau)},
            {"relaxation", relaxation ? "on" : "off"},
            {"norm", norm == NormConvention::weighted ? "weighted" : "unweighted"},
            {"output_dir", output_dir},
            {"refine_dt", refine_dt ? "on" : "off"},
            {"refine_max", std::to_string(refine_max)},
            {"sample_every", std::to_string(sample_every)},
            {"dealias", dealias ? "on" : "off"},
            {"rho_left", fmt(rho_left)},
            {"rho_right", fmt(rho_right)},
            {"step_sharpness", fmt(step_sharpness)},
            {"wrap_width", fmt(wrap_width)},
            {"window", fmt(window_left) + "," + fmt(window_right)},
            {"extent", fmt(extent)},
            {"n_grid", std::to_string(n_grid)},
            {"s_max", fmt(s_max)},
        };
        return e;
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError(m); };
        const bool needs_grid = experiment != ExperimentKind::phase_portrait;
        if (needs_grid) {
            if (!(x_right > x_left)) fail("domain requires x_left < x_right");
            if (n < 4 || n % 2) fail("n must be even and >= 4");
            if (!(t_end > 0.0)) fail("t_end must be > 0");
        }
        const bool needs_dt = needs_grid && experiment != ExperimentKind::aa_study;
        if (needs_dt && !(dt > 0.0)) fail("dt must be > 0");
        for (double t : tau_list)
            if (!(t > 0.0)) fail("tau_list entries must be > 0");
        switch (experiment) {
        case ExperimentKind::ap_study:
            if (tau_list.empty()) fail("ap_study requires tau_list");
            for (std::size_t i = 1; i < tau_list.size(); ++i)
                if (!(tau_list[i] < tau_list[i - 1])) fail("tau_list must be strictly decreasing");
            get_method(method);
            break;
        case ExperimentKind::aa_study:
            if (methods.empty()) fail("aa_study requires methods");
            for (const auto& m : methods) get_method(m);
            if (dt_list.size() < 2) fail("aa_study requires at least two dt_list entries");
            for (double d : dt_list)
                if (!(d > 0.0)) fail("dt_list entries must be > 0");
            for (std::size_t i = 1; i < dt_list.size(); ++i)
                if (!(dt_list[i] < dt_list[i - 1])) fail("dt_list must be strictly decreasing");
            if (!(mu > 0.0 && kappa > 0.0)) fail("aa_study uses the solitary wave: mu, kappa > 0");
            for (double t : tau_list)
                if (!(mu * t < 1.0)) fail("aa_study requires mu*tau < 1");
            break;
        case ExperimentKind::relaxation_study:
            if (!(mu > 0.0 && kappa > 0.0)) fail("relaxation_study uses the NLS soliton: mu, kappa > 0");
            if (tau_list.empty()) fail("relaxation_study requires tau_list");
            get_method(method);
            break;
        case ExperimentKind::riemann:
            if (!(rho_left > 0.0 && rho_right > 0.0)) fail("riemann requires rho_left, rho_right > 0");
            if (!(step_sharpness > 0.0)) fail("step_sharpness must be > 0");
            if (!(wrap_width >= 0.0)) fail("wrap_width must be >= 0");
            if (!(window_right > window_left)) fail("window requires left < right");
            get_method(method);
            break;
        case ExperimentKind::bound_state:
            get_method(method);
            break;
        case ExperimentKind::phase_portrait:
            if (!(mu * kappa > 0.0)) fail("phase_portrait requires mu*kappa > 0");
            if (!(tau >= 0.0)) fail("tau must be >= 0");
            if (!(extent > 0.0) || n_grid < 2 || !(s_max > 0.0))
                fail("phase_portrait requires extent > 0, n_grid >= 2, s_max > 0");
            break;
        }
    }
};

/// Builds a config from key/value text (`key = value` lines, `#` comments)
/// followed by `overrides` in order. The experiment and scale keys select
/// the defaults; every other key is applied on top of them.
inline ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                                     std::optional<ExperimentKind> experiment = std::nullopt) {
    std::vector<std::pair<std::string, std::string>> kv;
    auto add = [&](const std::string& line, const std::string& where) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key=value, got '" + line + "'");
        const auto key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        kv.emplace_back(key, detail::trim(line.substr(eq + 1)));
    };
    std::stringstream ss(text);
    std::string line;
    for (int lineno = 1; std::getline(ss, line); ++lineno) {
        if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = detail::trim(line);
        if (!line.empty()) add(line, "config line " + std::to_string(lineno));
    }
    for (const auto& o : overrides) add(o, "override");

    ExperimentKind kind = experiment.value_or(ExperimentKind::ap_study);
    Scale scale = Scale::desk;
    bool have_kind = experiment.has_value();
    for (const auto& [k, v] : kv) {
        if (k == "experiment") {
            const auto parsed = parse_experiment(v);
            if (experiment && parsed != *experiment)
                throw ConfigError(std::string("config selects experiment '") + v + "' but '" +
                                  to_string(*experiment) + "' was requested");
            kind = parsed;
            have_kind = true;
        }
        if (k == "scale") {
            ExperimentConfig tmp;
            tmp.set(k, v);
            scale = tmp.scale;
        }
    }
    if (!have_kind) throw ConfigError("no experiment selected");
    auto cfg = ExperimentConfig::defaults(kind, scale);
    for (const auto& [k, v] : kv) cfg.set(k, v);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides,
                                    std::optional<ExperimentKind> experiment = std::nullopt) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file '" + file.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides, experiment);
}

/// Writes `# key=value` header lines for a config.
inline void write_config_header(std::ostream& os, const ExperimentConfig& cfg) {
    for (const auto& [k, v] : cfg.entries()) os << "# " << k << "=" << v << "\n";
}

// ---------------------------------------------------------------------------
// AP study

struct ApRow {
    double tau = 0.0;
    double err_q0 = NAN;
    double err_q1 = NAN;
    double err_q0_unweighted = NAN;
    double err_q1_unweighted = NAN;
    std::optional<double> eoc_q0;
    std::optional<double> eoc_q1;
    std::string status = "ok";
};

struct ApResult {
    double dt = 0.0; ///< step size after the refinement check
    std::vector<ApRow> rows;
    /// Relative change of err_q0 at the refinement check's last halving.
    std::optional<double> refine_change;
};

namespace detail {

inline ComplexField sech_data(const GridPtr& g) {
    return ComplexField::sample(g, [](double x) { return 1.0 / std::cosh(x); });
}

struct HypErr {
    double e0, e1, e0u, e1u;
};

inline HypErr ap_errors(const ExperimentConfig& c, const GridPtr& g, const ImExTableau& tab, double dt,
                        const NLSState& nls_final, double tau) {
    StepConfig sc;
    sc.dt = dt;
    const auto r = evolve(well_prepared_init(sech_data(g)), c.t_end, tab, sc,
                          NLSHModel({c.kappa, tau}, c.dealias));
    const auto w = hyperbolization_error(nls_final.u, r.state, NormConvention::weighted);
    const auto u = hyperbolization_error(nls_final.u, r.state, NormConvention::unweighted);
    return {w.first, w.second, u.first, u.second};
}

inline NLSState nls_reference(const ExperimentConfig& c, const GridPtr& g, const ImExTableau& tab, double dt) {
    StepConfig sc;
    sc.dt = dt;
    return evolve(NLSState{sech_data(g)}, c.t_end, tab, sc, NLSModel({c.kappa}, c.dealias)).state;
}

} // namespace detail

/// Hyperbolization error ||u - q0||, ||D u - q1|| at t_end for each tau,
/// starting from u0 = sech(x) and well-prepared NLSH data.
inline ApResult run_ap_study(const ExperimentConfig& c) {
    c.validate();
    const auto g = make_grid(c.x_left, c.x_right, c.n);
    const auto tab = get_method(c.method);
    ApResult res;
    res.dt = c.dt;

    if (c.refine_dt) {
        // Smallest tau >= 1e-8 in the list.
        double tau_ref = c.tau_list.front();
        for (double t : c.tau_list)
            if (t >= 1e-8 * (1 - 1e-12)) tau_ref = std::min(tau_ref, t);
        for (std::size_t k = 0; k < c.refine_max; ++k) {
            auto coarse = std::async(std::launch::async, [&] {
                return detail::ap_errors(c, g, tab, res.dt, detail::nls_reference(c, g, tab, res.dt), tau_ref).e0;
            });
            const double h = res.dt / 2;
            const double fine = detail::ap_errors(c, g, tab, h, detail::nls_reference(c, g, tab, h), tau_ref).e0;
            const double e = coarse.get();
            res.refine_change = std::abs(fine - e) / std::abs(fine);
            if (*res.refine_change < 0.01) break;
            res.dt = h;
        }
    }

    const NLSState nls = detail::nls_reference(c, g, tab, res.dt);
    std::vector<std::future<ApRow>> jobs;
    for (double tau : c.tau_list) {
        jobs.push_back(std::async(std::launch::async, [&, tau] {
            ApRow row;
            row.tau = tau;
            try {
                const auto e = detail::ap_errors(c, g, tab, res.dt, nls, tau);
                const bool w = c.norm == NormConvention::weighted;
                row.err_q0 = w ? e.e0 : e.e0u;
                row.err_q1 = w ? e.e1 : e.e1u;
                row.err_q0_unweighted = e.e0u;
                row.err_q1_unweighted = e.e1u;
            } catch (const NonFiniteState& ex) {
                row.status = std::string("unstable: ") + ex.what();
            }
            return row;
        }));
    }
    for (auto& j : jobs) res.rows.push_back(j.get());
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        auto& a = res.rows[i - 1];
        auto& b = res.rows[i];
        b.eoc_q0 = eoc({{a.tau, a.err_q0}, {b.tau, b.err_q0}})[0];
        b.eoc_q1 = eoc({{a.tau, a.err_q1}, {b.tau, b.err_q1}})[0];
    }
    return res;
}

// ---------------------------------------------------------------------------
// AA study

struct AaRow {
    std::string method;
    double tau = 0.0;
    double dt = 0.0;
    double err_q0 = NAN;
    double err_q1 = NAN;
    std::string status = "ok";
};

struct AaSlope {
    std::string method;
    double tau = 0.0;
    std::string component;
    double slope = NAN;
};

struct AaResult {
    std::vector<AaRow> rows;
    std::vector<AaSlope> slopes;

    std::optional<double> slope(const std::string& method, double tau, const std::string& component) const {
        const std::string canon = get_method(method).name;
        for (const auto& s : slopes)
            if (s.method == canon && s.tau == tau && s.component == component) return s.slope;
        return std::nullopt;
    }
};

/// Error against the exact rotated NLSH solitary wave over a dt sweep.
inline AaResult run_aa_study(const ExperimentConfig& c) {
    c.validate();
    const auto g = make_grid(c.x_left, c.x_right, c.n);
    AaResult res;
    std::vector<std::future<AaRow>> jobs;
    for (const auto& m : c.methods) {
        const auto tab = get_method(m);
        for (double tau : c.tau_list) {
            for (double dt : c.dt_list) {
                jobs.push_back(std::async(std::launch::async, [&, tab, tau, dt] {
                    StandingWaveParams sp;
                    sp.mu = c.mu;
                    sp.kappa = c.kappa;
                    sp.tau = tau;
                    sp.k_const = c.k_const;
                    const auto q0 = sample_standing_wave(g, [&](double x) { return nlsh_solitary(x, sp); });
                    AaRow row{tab.name, tau, dt};
                    try {
                        StepConfig sc;
                        sc.dt = dt;
                        sc.relaxation = c.relaxation ? Relaxation::mass : Relaxation::off;
                        const auto r = evolve(q0, c.t_end, tab, sc, NLSHModel({c.kappa, tau}, c.dealias));
                        const auto ex = rotate_in_time(q0, c.mu, r.t);
                        row.err_q0 = norm_l2(r.state.q0 - ex.q0, c.norm);
                        row.err_q1 = norm_l2(r.state.q1 - ex.q1, c.norm);
                    } catch (const NonFiniteState& e) {
                        row.status = std::string("unstable: ") + e.what();
                    }
                    return row;
                }));
            }
        }
    }
    for (auto& j : jobs) res.rows.push_back(j.get());

    for (const auto& m : c.methods) {
        const std::string name = get_method(m).name;
        for (double tau : c.tau_list) {
            for (const char* comp : {"q0", "q1"}) {
                std::vector<std::pair<double, double>> pts;
                for (const auto& r : res.rows)
                    if (r.method == name && r.tau == tau && r.status == "ok") {
                        const double e = comp[1] == '0' ? r.err_q0 : r.err_q1;
                        if (e > 0.0 && std::isfinite(e)) pts.emplace_back(r.dt, e);
                    }
                res.slopes.push_back({name, tau, comp, pts.size() >= 2 ? fitted_slope(pts) : NAN});
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Relaxation study

struct RelaxRow {
    double t = 0.0;
    std::string variant;
    double tau = 0.0; ///< 0 for the NLS variants
    double error = 0.0;
    double mass_drift = 0.0;
    double gamma = 1.0;
};

struct RelaxResult {
    std::vector<RelaxRow> rows;
    /// Largest relative mass drift per variant/tau over the run.
    std::map<std::pair<std::string, double>, double> max_drift;
};

/// Error against the exact NLS soliton e^{i mu t} u+(x) over time for NLS and
/// NLSH, with and without relaxation.
inline RelaxResult run_relaxation_study(const ExperimentConfig& c) {
    c.validate();
    const auto g = make_grid(c.x_left, c.x_right, c.n);
    const auto tab = get_method(c.method);
    StandingWaveParams sp;
    sp.mu = c.mu;
    sp.kappa = c.kappa;
    sp.k_const = c.k_const;
    const auto u0 = ComplexField::sample(g, [&](double x) { return nls_ground_state(x, sp); });

    auto run = [&](const std::string& variant, double tau, bool relax) {
        std::vector<RelaxRow> rows;
        StepConfig sc;
        sc.dt = c.dt;
        sc.relaxation = relax ? Relaxation::mass : Relaxation::off;
        sc.sample_every = c.sample_every;
        double m0 = 0.0;
        auto observe = [&](double t, const auto& state, double gamma) {
            const ComplexField* u = nullptr;
            double mass = 0.0;
            if constexpr (requires { state.q0; }) {
                u = &state.q0;
                mass = nlsh_invariants(state, {c.kappa, tau}).mass;
            } else {
                u = &state.u;
                mass = nls_invariants(state.u, {c.kappa}).mass;
            }
            if (rows.empty()) m0 = mass;
            const auto ex = rotate_in_time(u0, c.mu, t);
            rows.push_back({t, variant, tau, norm_l2(*u - ex, c.norm), std::abs(mass / m0 - 1.0), gamma});
        };
        if (tau == 0.0)
            evolve(NLSState{u0}, c.t_end, tab, sc, NLSModel({c.kappa}, c.dealias), observe);
        else
            evolve(well_prepared_init(u0), c.t_end, tab, sc, NLSHModel({c.kappa, tau}, c.dealias), observe);
        return rows;
    };

    std::vector<std::future<std::vector<RelaxRow>>> jobs;
    jobs.push_back(std::async(std::launch::async, run, "nls", 0.0, false));
    jobs.push_back(std::async(std::launch::async, run, "nls_relaxed", 0.0, true));
    for (double tau : c.tau_list) {
        jobs.push_back(std::async(std::launch::async, run, "nlsh", tau, false));
        jobs.push_back(std::async(std::launch::async, run, "nlsh_relaxed", tau, true));
    }
    RelaxResult res;
    for (auto& j : jobs) {
        for (auto& r : j.get()) {
            auto& d = res.max_drift[{r.variant, r.tau}];
            d = std::max(d, r.mass_drift);
            res.rows.push_back(std::move(r));
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Riemann problem

struct RiemannProfile {
    std::string variant;
    double tau = 0.0;
    std::vector<double> x;
    std::vector<double> rho;
    std::vector<double> phi;
};

struct RiemannResult {
    std::vector<RiemannProfile> profiles; ///< NLS first, then NLSH per tau
    /// ||rho_NLSH - rho_NLS|| (weighted L2 over the output window) per tau.
    std::vector<std::pair<double, double>> rho_diff;
    std::vector<std::string> warnings;
};

/// rho(x, 0) from a smoothed step between rho_left and rho_right.
inline double riemann_density(double x, const ExperimentConfig& c) {
    const double mid = 0.5 * (c.rho_left + c.rho_right);
    const double half = 0.5 * (c.rho_right - c.rho_left);
    double s = std::tanh(c.step_sharpness * x);
    if (c.wrap_width > 0.0)
        s -= std::tanh((x - c.x_right) / c.wrap_width) + std::tanh((x - c.x_left) / c.wrap_width);
    return mid + half * s;
}

inline RiemannResult run_riemann(const ExperimentConfig& c) {
    c.validate();
    const auto g = make_grid(c.x_left, c.x_right, c.n);
    const auto tab = get_method(c.method);
    const auto u0 = ComplexField::sample(g, [&](double x) { return std::sqrt(riemann_density(x, c)); });
    RiemannResult res;

    const double hydro = 2.0 * std::sqrt(std::abs(c.kappa) * std::max(c.rho_left, c.rho_right));
    const double margin = std::min(c.window_left - c.x_left, c.x_right - c.window_right);
    for (double tau : c.tau_list) {
        const double travel = (1.0 / std::sqrt(tau) + hydro) * c.t_end;
        if (travel > margin)
            res.warnings.push_back("tau=" + detail::fmt(tau) + ": boundary waves may travel " +
                                   detail::fmt(travel) + " > window margin " + detail::fmt(margin));
    }

    auto profile = [&](const std::string& variant, double tau, const ComplexField& u) {
        RiemannProfile p{variant, tau, {}, {}, {}};
        const auto h = hydro_transform(u);
        const auto x = g->nodes();
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j] < c.window_left || x[j] > c.window_right) continue;
            p.x.push_back(x[j]);
            p.rho.push_back(h.rho[j]);
            p.phi.push_back(h.phi[j]);
        }
        return p;
    };

    StepConfig sc;
    sc.dt = c.dt;
    sc.relaxation = c.relaxation ? Relaxation::mass : Relaxation::off;
    auto nls_job = std::async(std::launch::async, [&] {
        return profile("nls", 0.0, evolve(NLSState{u0}, c.t_end, tab, sc, NLSModel({c.kappa}, c.dealias)).state.u);
    });
    std::vector<std::future<RiemannProfile>> jobs;
    for (double tau : c.tau_list)
        jobs.push_back(std::async(std::launch::async, [&, tau] {
            const auto r = evolve(well_prepared_init(u0), c.t_end, tab, sc, NLSHModel({c.kappa, tau}, c.dealias));
            return profile("nlsh", tau, r.state.q0);
        }));
    res.profiles.push_back(nls_job.get());
    for (auto& j : jobs) res.profiles.push_back(j.get());

    const auto& ref = res.profiles.front().rho;
    for (std::size_t i = 1; i < res.profiles.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < ref.size(); ++j) s += std::pow(res.profiles[i].rho[j] - ref[j], 2);
        res.rho_diff.emplace_back(res.profiles[i].tau, std::sqrt(s * g->dx()));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Bound states

/// Exact linear Schrodinger flow e^{i t d_xx} u0, applied mode by mode.
inline ComplexField linear_schrodinger_exact(const ComplexField& u0, double t) {
    const auto d2 = u0.grid().d2_multiplier();
    std::vector<cplx> m(d2.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::exp(cplx{0.0, t} * d2[k]);
    ComplexField out(u0.grid_ptr());
    apply_fourier_multiplier(u0, m, out);
    return out;
}

struct BoundStateResult {
    std::vector<double> x;
    std::vector<std::pair<std::string, double>> variants; ///< (name, tau)
    std::vector<std::vector<double>> abs_profile;         ///< per variant
    /// sup |q0 - u| per tau.
    std::vector<std::pair<double, double>> sup_diff;
    /// sup |u - exact| when kappa = 0.
    std::optional<double> linear_oracle_error;
};

inline BoundStateResult run_bound_state(const ExperimentConfig& c) {
    c.validate();
    const auto g = make_grid(c.x_left, c.x_right, c.n);
    const auto tab = get_method(c.method);
    const auto u0 = detail::sech_data(g);
    StepConfig sc;
    sc.dt = c.dt;
    sc.relaxation = c.relaxation ? Relaxation::mass : Relaxation::off;

    BoundStateResult res;
    res.x.assign(g->nodes().begin(), g->nodes().end());
    const auto nls = evolve(NLSState{u0}, c.t_end, tab, sc, NLSModel({c.kappa}, c.dealias)).state.u;
    std::vector<std::future<ComplexField>> jobs;
    for (double tau : c.tau_list)
        jobs.push_back(std::async(std::launch::async, [&, tau] {
            return evolve(well_prepared_init(u0), c.t_end, tab, sc, NLSHModel({c.kappa, tau}, c.dealias)).state.q0;
        }));

    auto absv = [](const ComplexField& f) {
        std::vector<double> a(f.size());
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::abs(f[j]);
        return a;
    };
    res.variants.emplace_back("nls", 0.0);
    res.abs_profile.push_back(absv(nls));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto q0 = jobs[i].get();
        res.variants.emplace_back("nlsh", c.tau_list[i]);
        res.abs_profile.push_back(absv(q0));
        res.sup_diff.emplace_back(c.tau_list[i], norm_max(q0 - nls));
    }
    if (c.kappa == 0.0) res.linear_oracle_error = norm_max(nls - linear_schrodinger_exact(u0, c.t_end));
    return res;
}

// ---------------------------------------------------------------------------
// Phase portrait

inline PhasePortrait run_phase_portrait(const ExperimentConfig& c) {
    c.validate();
    StandingWaveParams sp;
    sp.mu = c.mu;
    sp.kappa = c.kappa;
    sp.tau = c.tau;
    return phase_portrait(sp, c.extent, c.n_grid, c.s_max);
}

// ---------------------------------------------------------------------------
// CSV output

namespace detail {

inline std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

inline std::ofstream open_csv(const ExperimentConfig& c, const std::string& name,
                              std::vector<std::filesystem::path>& written) {
    std::filesystem::create_directories(c.output_dir);
    const auto path = std::filesystem::path(c.output_dir) / name;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    write_config_header(os, c);
    written.push_back(path);
    return os;
}

} // namespace detail

/// Runs the configured experiment and writes its CSV files into
/// `output_dir`. Returns the written paths; warnings go to `log`.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& c, std::ostream& log) {
    using detail::fmt;
    using detail::opt;
    std::vector<std::filesystem::path> out;
    switch (c.experiment) {
    case ExperimentKind::ap_study: {
        const auto r = run_ap_study(c);
        auto os = detail::open_csv(c, "ap_study.csv", out);
        os << "# dt_used=" << fmt(r.dt) << "\n";
        if (r.refine_change) os << "# refine_change=" << fmt(*r.refine_change) << "\n";
        os << "tau,err_q0,eoc_q0,err_q1,eoc_q1,err_q0_unweighted,err_q1_unweighted,status\n";
        for (const auto& row : r.rows) {
            os << fmt(row.tau) << ',' << fmt(row.err_q0) << ',' << opt(row.eoc_q0) << ',' << fmt(row.err_q1) << ','
               << opt(row.eoc_q1) << ',' << fmt(row.err_q0_unweighted) << ',' << fmt(row.err_q1_unweighted) << ','
               << row.status << "\n";
            if (row.status != "ok") log << "warning: tau=" << fmt(row.tau) << " " << row.status << "\n";
        }
        break;
    }
    case ExperimentKind::aa_study: {
        const auto r = run_aa_study(c);
        auto os = detail::open_csv(c, "aa_study.csv", out);
        os << "method,tau,dt,err_q0,err_q1,status\n";
        for (const auto& row : r.rows)
            os << '"' << row.method << "\"," << fmt(row.tau) << ',' << fmt(row.dt) << ',' << fmt(row.err_q0) << ','
               << fmt(row.err_q1) << ',' << row.status << "\n";
        auto ss = detail::open_csv(c, "aa_slopes.csv", out);
        ss << "method,tau,component,slope\n";
        for (const auto& s : r.slopes)
            ss << '"' << s.method << "\"," << fmt(s.tau) << ',' << s.component << ',' << fmt(s.slope) << "\n";
        break;
    }
    case ExperimentKind::relaxation_study: {
        const auto r = run_relaxation_study(c);
        auto os = detail::open_csv(c, "relaxation_study.csv", out);
        os << "t,variant,tau,error,mass_drift,gamma\n";
        for (const auto& row : r.rows)
            os << fmt(row.t) << ',' << row.variant << ',' << fmt(row.tau) << ',' << fmt(row.error) << ','
               << fmt(row.mass_drift) << ',' << fmt(row.gamma) << "\n";
        break;
    }
    case ExperimentKind::riemann: {
        const auto r = run_riemann(c);
        for (const auto& w : r.warnings) log << "warning: " << w << "\n";
        auto os = detail::open_csv(c, "riemann.csv", out);
        for (const auto& w : r.warnings) os << "# warning=" << w << "\n";
        os << "variant,tau,x,rho,phi\n";
        for (const auto& p : r.profiles)
            for (std::size_t j = 0; j < p.x.size(); ++j)
                os << p.variant << ',' << fmt(p.tau) << ',' << fmt(p.x[j]) << ',' << fmt(p.rho[j]) << ','
                   << fmt(p.phi[j]) << "\n";
        auto ss = detail::open_csv(c, "riemann_summary.csv", out);
        ss << "tau,rho_diff_l2\n";
        for (const auto& [tau, d] : r.rho_diff) ss << fmt(tau) << ',' << fmt(d) << "\n";
        break;
    }
    case ExperimentKind::bound_state: {
        const auto r = run_bound_state(c);
        auto os = detail::open_csv(c, "bound_state.csv", out);
        if (r.linear_oracle_error) os << "# linear_oracle_error=" << fmt(*r.linear_oracle_error) << "\n";
        os << "variant,tau,x,abs_value\n";
        for (std::size_t v = 0; v < r.variants.size(); ++v)
            for (std::size_t j = 0; j < r.x.size(); ++j)
                os << r.variants[v].first << ',' << fmt(r.variants[v].second) << ',' << fmt(r.x[j]) << ','
                   << fmt(r.abs_profile[v][j]) << "\n";
        break;
    }
    case ExperimentKind::phase_portrait: {
        const auto r = run_phase_portrait(c);
        auto fs = detail::open_csv(c, "phase_field.csv", out);
        fs << "q0,q1,dq0,dq1\n";
        for (const auto& s : r.field)
            fs << fmt(s.q0) << ',' << fmt(s.q1) << ',' << fmt(s.dq0) << ',' << fmt(s.dq1) << "\n";
        auto os = detail::open_csv(c, "phase_orbits.csv", out);
        os << "orbit,s,q0,q1,first_integral\n";
        for (const auto& p : r.orbits)
            os << p.orbit << ',' << fmt(p.s) << ',' << fmt(p.q0) << ',' << fmt(p.q1) << ','
               << fmt(p.first_integral) << "\n";
        break;
    }
    }
    return out;
}

} // namespace nlsh
