#pragma once

#include "nlsh/diagnostics.hpp"
#include "nlsh/errors.hpp"
#include "nlsh/models.hpp"
#include "nlsh/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <utility>
#include <vector>

namespace nlsh {

enum class Relaxation { off, mass };

struct StepConfig {
    double dt = 1e-3;
    Relaxation relaxation = Relaxation::off;
    /// gamma falls back to 1 when ||d||^2 < gamma_guard * ||Q^n||^2.
    double gamma_guard = 1e-14;
    /// Record diagnostics every this many steps (0: first and last only).
    std::size_t sample_every = 0;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
    }
};

template <typename S>
concept ImexState = std::copyable<S> && requires(S s, const S& cs, double a) {
    { s.axpy(a, cs) };
    { s.set_zero() };
    { cs.all_finite() } -> std::convertible_to<bool>;
};

template <typename M>
concept ImexModel = ImexState<typename M::State> &&
    requires(const M& m, const typename M::State& x, typename M::State& out, double alpha) {
        m.explicit_rhs(x, out);
        m.implicit_rhs(x, out);
        m.implicit_solve(x, alpha, out);
        { m.mass_inner(x, x) } -> std::convertible_to<double>;
    };

/// Root gamma != 0 of ||Qn + gamma d||^2 = ||Qn||^2 with d = Qnext - Qn,
/// gamma = -2 Re<Qn, d> / ||d||^2 in the model's mass inner product.
template <ImexModel Model>
double relaxation_gamma(const Model& model, const typename Model::State& qn,
                        const typename Model::State& qnext, double guard = 1e-14) {
    auto d = qnext;
    d.axpy(-1.0, qn);
    const double dd = model.mass_inner(d, d);
    const double nn = model.mass_inner(qn, qn);
    if (!(dd > guard * nn) || dd == 0.0) return 1.0;
    return -2.0 * model.mass_inner(qn, d) / dd;
}

/// NLSH form: the norm is ||q0||^2 + tau_weight ||q1||^2.
inline double relaxation_gamma(const NLSHState& qn, const NLSHState& qnext, double tau_weight,
                               double guard = 1e-14) {
    NLSHParams p;
    p.tau = tau_weight;
    return relaxation_gamma(NLSHModel(p), qn, qnext, guard);
}

inline double relaxation_gamma(const NLSState& un, const NLSState& unext, double guard = 1e-14) {
    return relaxation_gamma(NLSModel({}), un, unext, guard);
}

struct StepOutcome {
    double gamma = 1.0;
    double t_increment = 0.0;
};

/// Reusable stage storage for one tableau/model pair.
///
/// Each stage i assembles
///   rhs_i = Q^n + dt sum_{j<i} (a_ex[i][j] F_j + a_im[i][j] G_j)
/// and solves Q_i - dt a_im[i][i] g(Q_i) = rhs_i. The implicit stage
/// derivative is recovered as G_i = (Q_i - rhs_i) / (dt a_im[i][i]), which
/// never multiplies the O(1/tau) residual of g by round-off.
template <ImexModel Model>
class ImexStepper {
public:
    using State = typename Model::State;

    ImexStepper(ImExTableau tableau, const Model& model, const State& prototype)
        : t_(std::move(tableau)), model_(model), rhs_(prototype) {
        const std::size_t s = t_.s;
        stages_.assign(s, prototype);
        f_.assign(s, prototype);
        g_.assign(s, prototype);
        need_f_.assign(s, false);
        need_g_.assign(s, false);
        for (std::size_t j = 0; j < s; ++j) {
            need_f_[j] = t_.b_ex[j] != 0.0;
            need_g_[j] = t_.b_im[j] != 0.0;
            for (std::size_t i = j + 1; i < s; ++i) {
                need_f_[j] = need_f_[j] || t_.a_ex[i][j] != 0.0;
                need_g_[j] = need_g_[j] || t_.a_im[i][j] != 0.0;
            }
        }
    }

    const ImExTableau& tableau() const noexcept { return t_; }
    const Model& model() const noexcept { return model_; }

    /// Computes the unrelaxed update Q^{n+1} from `qn` into `out`.
    void advance(const State& qn, double dt, State& out, std::size_t step_index = 0, double t = 0.0) {
        const std::size_t s = t_.s;
        for (std::size_t i = 0; i < s; ++i) {
            rhs_ = qn;
            for (std::size_t j = 0; j < i; ++j) {
                if (t_.a_ex[i][j] != 0.0) rhs_.axpy(dt * t_.a_ex[i][j], f_[j]);
                if (t_.a_im[i][j] != 0.0) rhs_.axpy(dt * t_.a_im[i][j], g_[j]);
            }
            const double alpha = dt * t_.a_im[i][i];
            if (alpha != 0.0) {
                model_.implicit_solve(rhs_, alpha, stages_[i]);
                if (need_g_[i]) {
                    g_[i] = stages_[i];
                    g_[i].axpy(-1.0, rhs_);
                    scale(g_[i], 1.0 / alpha);
                }
            } else {
                stages_[i] = rhs_;
                if (need_g_[i]) model_.implicit_rhs(stages_[i], g_[i]);
            }
            if (!stages_[i].all_finite()) throw NonFiniteState(i, step_index, t);
            if (need_f_[i]) model_.explicit_rhs(stages_[i], f_[i]);
        }

        if (t_.flags.gsa) {
            out = stages_[s - 1];
        } else {
            out = qn;
            for (std::size_t j = 0; j < s; ++j) {
                if (t_.b_ex[j] != 0.0) out.axpy(dt * t_.b_ex[j], f_[j]);
                if (t_.b_im[j] != 0.0) out.axpy(dt * t_.b_im[j], g_[j]);
            }
        }
        if (!out.all_finite()) throw NonFiniteState(s, step_index, t);
    }

    /// Advances `q` in place by one step, applying relaxation if requested.
    StepOutcome step(State& q, double dt, Relaxation relax, double guard = 1e-14,
                     std::size_t step_index = 0, double t = 0.0) {
        next_ = q;
        advance(q, dt, next_, step_index, t);
        if (relax == Relaxation::off) {
            std::swap(q, next_);
            return {1.0, dt};
        }
        const double gamma = relaxation_gamma(model_, q, next_, guard);
        // q <- q + gamma (next - q)
        next_.axpy(-1.0, q);
        q.axpy(gamma, next_);
        return {gamma, gamma * dt};
    }

private:
    static void scale(State& x, double a) {
        auto tmp = x;
        x.set_zero();
        x.axpy(a, tmp);
    }

    ImExTableau t_;
    Model model_;
    State rhs_;
    State next_ = rhs_;
    std::vector<State> stages_;
    std::vector<State> f_;
    std::vector<State> g_;
    std::vector<bool> need_f_;
    std::vector<bool> need_g_;
};

/// One ImEx step; returns the new state and the time increment (gamma dt
/// when relaxation is on).
template <ImexModel Model>
std::pair<typename Model::State, double> imex_step(const typename Model::State& state,
                                                   const ImExTableau& tableau, const StepConfig& cfg,
                                                   const Model& model) {
    cfg.validate();
    ImexStepper<Model> stepper(tableau, model, state);
    auto q = state;
    const auto out = stepper.step(q, cfg.dt, cfg.relaxation, cfg.gamma_guard);
    return {std::move(q), out.t_increment};
}

template <typename State>
struct EvolveResult {
    State state;
    double t = 0.0;
    std::size_t steps = 0;
    std::vector<DiagnosticsRecord> records;
    /// max over steps of |gamma_n - 1| (0 when relaxation is off).
    double max_gamma_deviation = 0.0;
};

struct NoObserver {
    template <typename State>
    void operator()(double, const State&, double) const {}
};

/// Integrates from t = 0 to t_end.
///
/// Without relaxation the step count is fixed and time is n*dt, with a final
/// shortened step landing on t_end. With relaxation the time advances by
/// gamma_n dt; the final step length h is found by a secant iteration on
/// gamma(h) h = t_end - t so that the returned time is t_end.
/// `observer(t, state, gamma)` is called at every diagnostics sample.
template <ImexModel Model, typename Observer = NoObserver>
EvolveResult<typename Model::State> evolve(const typename Model::State& state0, double t_end,
                                           const ImExTableau& tableau, const StepConfig& cfg,
                                           const Model& model, Observer&& observer = {}) {
    using State = typename Model::State;
    cfg.validate();
    if (!(t_end >= 0.0)) throw InvalidArgument("t_end must be >= 0");

    EvolveResult<State> res{state0, 0.0, 0, {}, 0.0};
    ImexStepper<Model> stepper(tableau, model, state0);
    auto sample = [&](double gamma) {
        res.records.push_back(diagnose(model, res.state, res.t, gamma));
        observer(res.t, res.state, gamma);
    };
    sample(1.0);

    const double t_tol = 1e-12 * std::max(1.0, t_end);
    const double dt = cfg.dt;
    double last_gamma = 1.0;

    if (cfg.relaxation == Relaxation::off) {
        const auto full = static_cast<std::size_t>(std::floor(t_end / dt * (1.0 + 1e-12)));
        for (std::size_t n = 0; n < full; ++n) {
            stepper.step(res.state, dt, Relaxation::off, cfg.gamma_guard, n, res.t);
            res.t = static_cast<double>(n + 1) * dt;
            ++res.steps;
            if (cfg.sample_every && res.steps % cfg.sample_every == 0 && res.t < t_end - t_tol)
                sample(1.0);
        }
        const double rem = t_end - res.t;
        if (rem > t_tol) {
            stepper.step(res.state, rem, Relaxation::off, cfg.gamma_guard, res.steps, res.t);
            ++res.steps;
        }
        res.t = t_end;
        if (res.records.size() == 1 || res.records.back().t != res.t) sample(1.0);
        return res;
    }

    State saved = state0;
    while (t_end - res.t > t_tol) {
        const double rem = t_end - res.t;
        if (rem > 1.5 * dt) {
            const auto out = stepper.step(res.state, dt, cfg.relaxation, cfg.gamma_guard, res.steps, res.t);
            res.t += out.t_increment;
            last_gamma = out.gamma;
        } else {
            // gamma(h) h = rem, solved by secant iteration from h = rem.
            saved = res.state;
            auto attempt = [&](double h) {
                res.state = saved;
                return stepper.step(res.state, h, cfg.relaxation, cfg.gamma_guard, res.steps, res.t);
            };
            double h0 = rem;
            auto o0 = attempt(h0);
            double f0 = o0.t_increment - rem;
            double h1 = rem / o0.gamma;
            StepOutcome o1 = o0;
            double f1 = f0;
            for (int it = 0; it < 30 && std::abs(f0) > t_tol * 0.1; ++it) {
                o1 = attempt(h1);
                f1 = o1.t_increment - rem;
                if (std::abs(f1) <= t_tol * 0.1 || f1 == f0) break;
                const double h2 = h1 - f1 * (h1 - h0) / (f1 - f0);
                h0 = h1;
                f0 = f1;
                h1 = h2;
            }
            if (std::abs(f1) > std::abs(f0)) o1 = attempt(h0);
            last_gamma = o1.gamma;
            res.t = (std::abs(res.t + o1.t_increment - t_end) <= t_tol) ? t_end : res.t + o1.t_increment;
        }
        res.max_gamma_deviation = std::max(res.max_gamma_deviation, std::abs(last_gamma - 1.0));
        ++res.steps;
        if (cfg.sample_every && res.steps % cfg.sample_every == 0 && t_end - res.t > t_tol)
            sample(last_gamma);
    }
    sample(last_gamma);
    return res;
}

} // namespace nlsh
