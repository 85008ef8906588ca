#pragma once

#include "nlsh/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nlsh {

enum class ImexKind { TypeI, TypeII };

struct TableauFlags {
    bool sa_implicit = false;   // a_im last row equals b_im
    bool fsal_explicit = false; // a_ex last row equals b_ex
    bool gsa = false;           // both of the above
};

/// Paired explicit/implicit Butcher arrays of an additive ImEx Runge-Kutta
/// method. Matrices are square, s x s, stored as rows.
struct ImExTableau {
    using Matrix = std::vector<std::vector<double>>;

    std::string name;
    std::size_t s = 0;
    Matrix a_ex;
    Matrix a_im;
    std::vector<double> b_ex;
    std::vector<double> b_im;
    std::vector<double> c_ex;
    std::vector<double> c_im;
    int order = 0;
    ImexKind kind = ImexKind::TypeI;
    TableauFlags flags;
};

struct TableauViolation {
    std::string condition;
    double residual = 0.0;
};

namespace detail {

inline constexpr double row_sum_tol = 1e-14;
inline constexpr double order_tol = 1e-12;

inline std::vector<double> mat_vec(const ImExTableau::Matrix& a, const std::vector<double>& v) {
    std::vector<double> r(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r[i] += a[i][j] * v[j];
    return r;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double max_row_mismatch(const std::vector<double>& row, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) m = std::max(m, std::abs(row[j] - b[j]));
    return m;
}

} // namespace detail

/// Checks every structural invariant and the additive order conditions up to
/// min(order, 3). Returns one entry per violated condition; empty means valid.
inline std::vector<TableauViolation> validate(const ImExTableau& t) {
    using namespace detail;
    std::vector<TableauViolation> out;
    auto report = [&](std::string cond, double r) { out.push_back({std::move(cond), r}); };

    const std::size_t s = t.s;
    auto square = [s](const ImExTableau::Matrix& a) {
        return a.size() == s && std::all_of(a.begin(), a.end(), [s](auto& r) { return r.size() == s; });
    };
    if (s == 0 || !square(t.a_ex) || !square(t.a_im) || t.b_ex.size() != s || t.b_im.size() != s ||
        t.c_ex.size() != s || t.c_im.size() != s) {
        report("shape", 1.0);
        return out;
    }

    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = i; j < s; ++j)
            if (t.a_ex[i][j] != 0.0)
                report("explicit part not strictly lower triangular at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")",
                       std::abs(t.a_ex[i][j]));
        for (std::size_t j = i + 1; j < s; ++j)
            if (t.a_im[i][j] != 0.0)
                report("implicit part not lower triangular at (" + std::to_string(i) + "," +
                           std::to_string(j) + ")",
                       std::abs(t.a_im[i][j]));
    }

    for (std::size_t i = 0; i < s; ++i) {
        double se = 0.0, si = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            se += t.a_ex[i][j];
            si += t.a_im[i][j];
        }
        if (std::abs(se - t.c_ex[i]) > row_sum_tol)
            report("explicit row sum != c_ex at row " + std::to_string(i), std::abs(se - t.c_ex[i]));
        if (std::abs(si - t.c_im[i]) > row_sum_tol)
            report("implicit row sum != c_im at row " + std::to_string(i), std::abs(si - t.c_im[i]));
    }

    if (t.kind == ImexKind::TypeI) {
        for (std::size_t i = 0; i < s; ++i)
            if (t.a_im[i][i] == 0.0)
                report("type I requires nonzero implicit diagonal at " + std::to_string(i), 0.0);
    } else {
        double first_row = 0.0;
        for (std::size_t j = 0; j < s; ++j)
            first_row = std::max({first_row, std::abs(t.a_im[0][j]), std::abs(t.a_ex[0][j])});
        if (first_row != 0.0) report("type II requires a zero first stage row", first_row);
        for (std::size_t i = 1; i < s; ++i)
            if (t.a_im[i][i] == 0.0)
                report("type II requires invertible lower-right implicit block (diag " +
                           std::to_string(i) + ")",
                       0.0);
    }

    const double sa_res = max_row_mismatch(t.a_im[s - 1], t.b_im);
    const double fsal_res = max_row_mismatch(t.a_ex[s - 1], t.b_ex);
    const bool sa = sa_res <= row_sum_tol;
    const bool fsal = fsal_res <= row_sum_tol;
    if (t.flags.sa_implicit != sa) report("SA flag mismatch (last implicit row vs b_im)", sa_res);
    if (t.flags.fsal_explicit != fsal) report("FSAL flag mismatch (last explicit row vs b_ex)", fsal_res);
    if (t.flags.gsa != (sa && fsal))
        report("GSA row mismatch (last rows vs weights)", std::max(sa_res, fsal_res));

    const int p = std::min(t.order, 3);
    const std::vector<double> ones(s, 1.0);
    const std::pair<const char*, const std::vector<double>*> bs[] = {{"ex", &t.b_ex}, {"im", &t.b_im}};
    const std::pair<const char*, const std::vector<double>*> cs[] = {{"ex", &t.c_ex}, {"im", &t.c_im}};
    const std::pair<const char*, const ImExTableau::Matrix*> as[] = {{"ex", &t.a_ex}, {"im", &t.a_im}};
    auto check = [&](double value, double target, const std::string& cond) {
        const double r = std::abs(value - target);
        if (r > order_tol) report(cond, r);
    };

    if (p >= 1)
        for (auto [bn, b] : bs) check(dot(*b, ones), 1.0, std::string("order 1: sum b_") + bn);
    if (p >= 2)
        for (auto [bn, b] : bs)
            for (auto [cn, c] : cs)
                check(dot(*b, *c), 0.5, std::string("order 2: b_") + bn + ".c_" + cn);
    if (p >= 3) {
        for (auto [bn, b] : bs) {
            for (auto [c1n, c1] : cs)
                for (auto [c2n, c2] : cs) {
                    std::vector<double> cc(s);
                    for (std::size_t i = 0; i < s; ++i) cc[i] = (*c1)[i] * (*c2)[i];
                    check(dot(*b, cc), 1.0 / 3.0,
                          std::string("order 3: b_") + bn + ".(c_" + c1n + "*c_" + c2n + ")");
                }
            for (auto [an, a] : as)
                for (auto [cn, c] : cs)
                    check(dot(*b, mat_vec(*a, *c)), 1.0 / 6.0,
                          std::string("order 3: b_") + bn + ".A_" + an + ".c_" + cn);
        }
    }
    return out;
}

namespace detail {

inline std::vector<double> row_sums(const ImExTableau::Matrix& a) {
    std::vector<double> c(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (double v : a[i]) c[i] += v;
    return c;
}

inline ImExTableau make_tableau(std::string name, int order, ImexKind kind, TableauFlags flags,
                                ImExTableau::Matrix a_ex, std::vector<double> b_ex,
                                ImExTableau::Matrix a_im, std::vector<double> b_im) {
    ImExTableau t;
    t.name = std::move(name);
    t.s = b_ex.size();
    t.order = order;
    t.kind = kind;
    t.flags = flags;
    t.c_ex = row_sums(a_ex);
    t.c_im = row_sums(a_im);
    t.a_ex = std::move(a_ex);
    t.a_im = std::move(a_im);
    t.b_ex = std::move(b_ex);
    t.b_im = std::move(b_im);
    return t;
}

constexpr double r(double p, double q) { return p / q; }

inline ImExTableau ars111() {
    return make_tableau("ARS(1,1,1)", 1, ImexKind::TypeII, {true, true, true},
                        {{0, 0}, {1, 0}}, {1, 0},
                        {{0, 0}, {0, 1}}, {0, 1});
}

inline ImExTableau ssp2_332() {
    const double t = r(1, 3);
    return make_tableau("SSP2-ImEx(3,3,2)", 2, ImexKind::TypeI, {true, false, false},
                        {{0, 0, 0}, {0.5, 0, 0}, {0.5, 0.5, 0}}, {t, t, t},
                        {{0.25, 0, 0}, {0, 0.25, 0}, {t, t, t}}, {t, t, t});
}

inline ImExTableau ssp3_433() {
    const double alpha = 0.24169426078821;
    const double beta = 0.06042356519705;
    const double eta = 0.12915286960590;
    const std::vector<double> b = {0, r(1, 6), r(1, 6), r(2, 3)};
    auto t = make_tableau("SSP3-ImEx(3,4,3)", 3, ImexKind::TypeI, {false, false, false},
                          {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 1, 0, 0}, {0, 0.25, 0.25, 0}}, b,
                          {{alpha, 0, 0, 0},
                           {-alpha, alpha, 0, 0},
                           {0, 1 - alpha, alpha, 0},
                           {beta, eta, 0.5 - beta - eta - alpha, alpha}},
                          b);
    return t;
}

// Type I, second order, with an FSAL explicit part and an SA implicit part.
// Stages 1-3 coincide with SSP2-ImEx(3,3,2); the appended fourth stage makes
// both last rows equal the weights.
inline ImExTableau agsa_342() {
    const double t = r(1, 3);
    return make_tableau("AGSA(3,4,2)", 2, ImexKind::TypeI, {true, true, true},
                        {{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0.5, 0.5, 0, 0}, {t, t, t, 0}}, {t, t, t, 0},
                        {{0.25, 0, 0, 0}, {0, 0.25, 0, 0}, {t, t, t, 0}, {t, t, r(1, 12), 0.25}},
                        {t, t, r(1, 12), 0.25});
}

inline ImExTableau ars443() {
    const std::vector<double> b_ex = {0.25, 1.75, 0.75, -1.75, 0};
    const std::vector<double> b_im = {0, 1.5, -1.5, 0.5, 0.5};
    return make_tableau("ARS(4,4,3)", 3, ImexKind::TypeII, {true, true, true},
                        {{0, 0, 0, 0, 0},
                         {0.5, 0, 0, 0, 0},
                         {r(11, 18), r(1, 18), 0, 0, 0},
                         {r(5, 6), r(-5, 6), 0.5, 0, 0},
                         b_ex},
                        b_ex,
                        {{0, 0, 0, 0, 0},
                         {0, 0.5, 0, 0, 0},
                         {0, r(1, 6), 0.5, 0, 0},
                         {0, -0.5, 0.5, 0.5, 0},
                         b_im},
                        b_im);
}

inline ImExTableau ark324l2sa() {
    const double g = r(1767732205903, 4055673282236);
    const std::vector<double> b = {r(1471266399579, 7840856788654), r(-4482444167858, 7529755066697),
                                   r(11266239266428, 11593286722821), g};
    return make_tableau(
        "ARK3(2)4L[2]SA", 3, ImexKind::TypeII, {true, false, false},
        {{0, 0, 0, 0},
         {r(1767732205903, 2027836641118), 0, 0, 0},
         {r(5535828885825, 10492691773637), r(788022342437, 10882634858940), 0, 0},
         {r(6485989280629, 16251701735622), r(-4246266847089, 9704473918619),
          r(10755448449292, 10357097424841), 0}},
        b,
        {{0, 0, 0, 0},
         {g, g, 0, 0},
         {r(2746238789719, 10658868560708), r(-640167445237, 6845629431997), g, 0},
         b},
        b);
}

inline ImExTableau ark436l2sa() {
    const std::vector<double> b = {r(82889, 524892), 0, r(15625, 83664), r(69875, 102672),
                                   r(-2260, 8211), 0.25};
    return make_tableau(
        "ARK4(3)6L[2]SA", 4, ImexKind::TypeII, {true, false, false},
        {{0, 0, 0, 0, 0, 0},
         {0.5, 0, 0, 0, 0, 0},
         {r(13861, 62500), r(6889, 62500), 0, 0, 0, 0},
         {r(-116923316275, 2393684061468), r(-2731218467317, 15368042101831),
          r(9408046702089, 11113171139209), 0, 0, 0},
         {r(-451086348788, 2902428689909), r(-2682348792572, 7519795681897),
          r(12662868775082, 11960479115383), r(3355817975965, 11060851509271), 0, 0},
         {r(647845179188, 3216320057751), r(73281519250, 8382639484533),
          r(552539513391, 3454668386233), r(3354512671639, 8306763924573), r(4040, 17871), 0}},
        b,
        {{0, 0, 0, 0, 0, 0},
         {0.25, 0.25, 0, 0, 0, 0},
         {r(8611, 62500), r(-1743, 31250), 0.25, 0, 0, 0},
         {r(5012029, 34652500), r(-654441, 2922500), r(174375, 388108), 0.25, 0, 0},
         {r(15267082809, 155376265600), r(-71443401, 120774400), r(730878875, 902184768),
          r(2285395, 8070912), 0.25, 0},
         b},
        b);
}

inline std::string normalize_method_name(std::string_view name) {
    std::string out;
    for (char ch : name)
        if (std::isalnum(static_cast<unsigned char>(ch)))
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    return out;
}

struct RegistryEntry {
    const char* name;
    const char* alias;
    ImExTableau (*build)();
};

inline const std::vector<RegistryEntry>& registry() {
    static const std::vector<RegistryEntry> entries = {
        {"ARS(1,1,1)", "ars111", ars111},
        {"SSP2-ImEx(3,3,2)", "ssp2", ssp2_332},
        {"SSP3-ImEx(3,4,3)", "ssp3", ssp3_433},
        {"AGSA(3,4,2)", "agsa", agsa_342},
        {"ARS(4,4,3)", "ars443", ars443},
        {"ARK3(2)4L[2]SA", "ark3", ark324l2sa},
        {"ARK4(3)6L[2]SA", "ark4", ark436l2sa},
    };
    return entries;
}

} // namespace detail

/// Canonical names of every registered method.
inline std::vector<std::string> available_methods() {
    std::vector<std::string> names;
    for (const auto& e : detail::registry()) names.emplace_back(e.name);
    return names;
}

/// The six methods of the comparison table (everything except ARS(1,1,1)).
inline std::vector<std::string> comparison_methods() {
    return {"SSP2-ImEx(3,3,2)", "SSP3-ImEx(3,4,3)", "AGSA(3,4,2)",
            "ARS(4,4,3)",       "ARK3(2)4L[2]SA",   "ARK4(3)6L[2]SA"};
}

/// Looks a method up by canonical name, by its punctuation-free spelling
/// ("ars443") or by its short alias ("ars443", "ssp3", "ark4", ...).
inline ImExTableau get_method(std::string_view name) {
    const std::string key = detail::normalize_method_name(name);
    for (const auto& e : detail::registry()) {
        if (key == detail::normalize_method_name(e.name) || key == e.alias) {
            ImExTableau t = e.build();
            auto bad = validate(t);
            if (!bad.empty())
                throw InvalidTableau(t.name + ": " + bad.front().condition + " (residual " +
                                     std::to_string(bad.front().residual) + ")");
            return t;
        }
    }
    std::string msg = "unknown method '" + std::string(name) + "'; available:";
    for (const auto& e : detail::registry()) msg += std::string(" ") + e.name;
    throw UnknownMethod(msg);
}

/// Plain-text dump: a header block followed by one line per stage
/// ("c | row") for the explicit then the implicit part, each closed by a
/// "b" line. Numbers use 17 significant digits.
inline std::string dump(const ImExTableau& t) {
    std::ostringstream os;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "name " << t.name << '\n'
       << "stages " << t.s << '\n'
       << "order " << t.order << '\n'
       << "type " << (t.kind == ImexKind::TypeI ? "I" : "II") << '\n'
       << "flags sa=" << t.flags.sa_implicit << " fsal=" << t.flags.fsal_explicit
       << " gsa=" << t.flags.gsa << '\n';
    auto part = [&](const char* label, const ImExTableau::Matrix& a, const std::vector<double>& b,
                    const std::vector<double>& c) {
        os << label << '\n';
        for (std::size_t i = 0; i < t.s; ++i) {
            os << num(c[i]) << " |";
            for (double v : a[i]) os << ' ' << num(v);
            os << '\n';
        }
        os << "b |";
        for (double v : b) os << ' ' << num(v);
        os << '\n';
    };
    part("explicit", t.a_ex, t.b_ex, t.c_ex);
    part("implicit", t.a_im, t.b_im, t.c_im);
    return os.str();
}

} // namespace nlsh
