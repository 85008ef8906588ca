#include "nlsh/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace nlsh;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
    std::random_device rd;
    auto p = fs::temp_directory_path() / ("nlsh_test_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(p);
    return p;
}

// First line after the "# key=value" header block.
std::string column_header(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') return line;
    return {};
}

std::size_t data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) header = true;
        else ++n;
    }
    return n;
}

} // namespace

TEST(Config, CommentsWhitespaceAndOverrides) {
    const auto c = parse_config("# leading comment\n"
                                "experiment = ap_study\n"
                                "  n = 512   # trailing\n"
                                "\n"
                                "tau_list = 1e-2, 1e-3\n"
                                "domain = -8, 8\n",
                                {"n=256", "norm=unweighted"});
    EXPECT_EQ(c.experiment, ExperimentKind::ap_study);
    EXPECT_EQ(c.n, 256u);
    EXPECT_EQ(c.tau_list, (std::vector<double>{1e-2, 1e-3}));
    EXPECT_EQ(c.x_left, -8.0);
    EXPECT_EQ(c.x_right, 8.0);
    EXPECT_EQ(c.norm, NormConvention::unweighted);
    EXPECT_EQ(c.kappa, 8.0);
    EXPECT_EQ(c.method, "ARS(4,4,3)");
}

TEST(Config, Errors) {
    EXPECT_THROW(parse_config("experiment=ap_study\nbogus=1\n", {}), ConfigError);
    EXPECT_THROW(parse_config("experiment=ap_study\nn=abc\n", {}), ConfigError);
    EXPECT_THROW(parse_config("experiment=ap_study\nn=255\n", {}), ConfigError);
    EXPECT_THROW(parse_config("experiment=ap_study\nn\n", {}), ConfigError);
    EXPECT_THROW(parse_config("experiment=ap_study\ntau_list=1e-4,1e-2\n", {}), ConfigError);
    EXPECT_THROW(parse_config("experiment=ap_study\nrelaxation=maybe\n", {}), ConfigError);
    EXPECT_THROW(parse_config("experiment=nope\n", {}), ConfigError);
    EXPECT_THROW(parse_config("n=64\n", {}), ConfigError);
    EXPECT_THROW(parse_config("experiment=riemann\n", {}, ExperimentKind::ap_study), ConfigError);
    EXPECT_THROW(parse_config("", {"method=RK4"}, ExperimentKind::ap_study), UnknownMethod);
    EXPECT_THROW(parse_config("", {"mu=3", "tau_list=0.5"}, ExperimentKind::aa_study), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/file.cfg", {}), ConfigError);
}

TEST(Config, ExperimentDefaults) {
    const auto aa = parse_config("", {}, ExperimentKind::aa_study);
    EXPECT_EQ(aa.methods.size(), 4u);
    ASSERT_EQ(aa.dt_list.size(), 8u);
    EXPECT_DOUBLE_EQ(aa.dt_list.front(), 0.02);
    EXPECT_NEAR(aa.dt_list.back(), 0.02 / std::pow(2.0, 3.5), 1e-15);
    EXPECT_NEAR(aa.x_right, 5 * M_PI, 1e-15);
    EXPECT_EQ(aa.kappa, 1.0);

    const auto rd = parse_config("", {}, ExperimentKind::riemann);
    EXPECT_EQ(rd.x_right, 200.0);
    EXPECT_EQ(rd.n, 2048u);
    EXPECT_EQ(rd.t_end, 20.0);
    EXPECT_EQ(rd.kappa, -1.0);

    const auto rp = parse_config("scale = paper\n", {}, ExperimentKind::riemann);
    EXPECT_EQ(rp.x_left, -1600.0);
    EXPECT_EQ(rp.n, 16384u);
    EXPECT_EQ(rp.dt, 1e-4);
    EXPECT_EQ(rp.t_end, 70.0);
    EXPECT_EQ(rp.window_right, 335.0);

    const auto ap = parse_config("", {}, ExperimentKind::ap_study);
    EXPECT_EQ(ap.tau_list.size(), 5u);
    EXPECT_EQ(ap.n, 2048u);
    EXPECT_EQ(ap.x_right, 16.0);
    EXPECT_EQ(ap.t_end, 5.0);
}

TEST(Config, MethodListsKeepCommasInsideNames) {
    const auto c = parse_config("", {"methods = ARS(4,4,3), ARK3(2)4L[2]SA,ssp2"}, ExperimentKind::aa_study);
    EXPECT_EQ(c.methods, (std::vector<std::string>{"ARS(4,4,3)", "ARK3(2)4L[2]SA", "ssp2"}));
}

TEST(Config, HeaderRoundTrips) {
    auto c = parse_config("", {"tau_list=0.1,0.01", "k_const=0.25", "window=-5,5", "dealias=on"},
                          ExperimentKind::riemann);
    std::ostringstream os;
    write_config_header(os, c);
    std::string text = os.str();
    std::string stripped;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        const auto kv = line.substr(2);
        // empty list values are not valid input; skip them
        if (kv.back() == '=') continue;
        stripped += kv + "\n";
    }
    const auto back = parse_config(stripped, {});
    EXPECT_EQ(back.entries(), c.entries());
}

TEST(Riemann, InitialDensityLimitsAndWrap) {
    auto c = parse_config("", {"domain=-50,50"}, ExperimentKind::riemann);
    EXPECT_NEAR(riemann_density(-30, c), 2.0, 1e-15);
    EXPECT_NEAR(riemann_density(30, c), 1.0, 1e-15);
    EXPECT_NEAR(riemann_density(0, c), 1.5, 1e-15);
    c.wrap_width = 1.0;
    EXPECT_NEAR(riemann_density(-25, c), 2.0, 1e-15);
    EXPECT_NEAR(riemann_density(25, c), 1.0, 1e-15);
    EXPECT_NEAR(riemann_density(c.x_left, c), 1.5, 1e-12);
    EXPECT_NEAR(riemann_density(c.x_right, c), 1.5, 1e-12);
    for (double x : {-49.0, -40.0, 40.0, 49.5}) {
        const double r = riemann_density(x, c);
        EXPECT_GE(r, 1.0 - 1e-15);
        EXPECT_LE(r, 2.0 + 1e-15);
    }
}

TEST(Riemann, InitialPhaseVelocityIsZero) {
    const auto c = parse_config("", {"domain=-50,50", "n=1024"}, ExperimentKind::riemann);
    const auto g = make_grid(c.x_left, c.x_right, c.n);
    const auto u0 = ComplexField::sample(g, [&](double x) { return std::sqrt(riemann_density(x, c)); });
    const auto h = hydro_transform(u0);
    for (double v : h.phi) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Riemann, TinyRunWritesProfilesAndWarns) {
    const auto dir = scratch_dir("riemann");
    const auto c = parse_config("", {"domain=-20,20", "n=256", "t_end=1", "dt=1e-2", "tau_list=1e-2,1e-3",
                                     "window=-10,10", "output_dir=" + dir.string()},
                                ExperimentKind::riemann);
    std::ostringstream log;
    const auto files = run_experiment(c, log);
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(column_header(files[0]), "variant,tau,x,rho,phi");
    EXPECT_EQ(column_header(files[1]), "tau,rho_diff_l2");
    EXPECT_EQ(data_rows(files[1]), 2u);
    // (1/sqrt(1e-2) + hydrodynamic speed) * 1 > 10 = window margin
    EXPECT_NE(log.str().find("warning: tau=0.01"), std::string::npos);
    const auto r = run_riemann(c);
    ASSERT_EQ(r.profiles.size(), 3u);
    EXPECT_EQ(r.profiles[0].variant, "nls");
    EXPECT_EQ(r.profiles[0].x.front(), -10.0);
    fs::remove_all(dir);
}

TEST(ApStudy, TinyRun) {
    const auto dir = scratch_dir("ap");
    const auto c = parse_config("", {"n=256", "dt=1e-2", "t_end=0.2", "tau_list=1e-2,1e-3,1e-4", "refine_dt=off",
                                     "output_dir=" + dir.string()},
                                ExperimentKind::ap_study);
    const auto r = run_ap_study(c);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_FALSE(r.rows[0].eoc_q0.has_value());
    ASSERT_TRUE(r.rows[2].eoc_q0.has_value());
    EXPECT_NEAR(*r.rows[2].eoc_q0, 1.0, 0.2);
    EXPECT_EQ(r.dt, 1e-2);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.status, "ok");
        EXPECT_GT(row.err_q0_unweighted, row.err_q0); // dx < 1
    }
    std::ostringstream log;
    const auto files = run_experiment(c, log);
    ASSERT_EQ(files.size(), 1u);
    EXPECT_EQ(column_header(files[0]),
              "tau,err_q0,eoc_q0,err_q1,eoc_q1,err_q0_unweighted,err_q1_unweighted,status");
    EXPECT_EQ(data_rows(files[0]), 3u);
    fs::remove_all(dir);
}

TEST(ApStudy, RefinementCheckHalvesDt) {
    const auto c = parse_config("", {"n=128", "dt=0.05", "t_end=0.2", "tau_list=1e-2,1e-4", "refine_max=2"},
                                ExperimentKind::ap_study);
    const auto r = run_ap_study(c);
    ASSERT_TRUE(r.refine_change.has_value());
    EXPECT_LE(r.dt, 0.05);
    EXPECT_GE(r.dt, 0.05 / 4);
}

TEST(AaStudy, TinyRunFitsSlopes) {
    const auto dir = scratch_dir("aa");
    const auto c = parse_config("", {"methods=AGSA(3,4,2), ARS(4,4,3)", "n=256", "t_end=0.5", "dt_list=0.02,0.01,0.005",
                                     "tau_list=1e-2", "output_dir=" + dir.string()},
                                ExperimentKind::aa_study);
    const auto r = run_aa_study(c);
    EXPECT_EQ(r.rows.size(), 6u);
    ASSERT_TRUE(r.slope("agsa", 1e-2, "q0").has_value());
    EXPECT_NEAR(*r.slope("agsa", 1e-2, "q0"), 2.0, 0.3);
    EXPECT_NEAR(*r.slope("ars443", 1e-2, "q0"), 3.0, 0.3);
    std::ostringstream log;
    const auto files = run_experiment(c, log);
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(column_header(files[0]), "method,tau,dt,err_q0,err_q1,status");
    EXPECT_EQ(column_header(files[1]), "method,tau,component,slope");
    EXPECT_EQ(data_rows(files[1]), 4u);
    fs::remove_all(dir);
}

TEST(RelaxationStudy, RelaxedVariantsConserveMass) {
    const auto c = parse_config("", {"n=256", "t_end=1", "dt=1e-2", "tau_list=1e-2", "sample_every=10"},
                                ExperimentKind::relaxation_study);
    const auto r = run_relaxation_study(c);
    EXPECT_EQ(r.max_drift.size(), 4u);
    EXPECT_LT(r.max_drift.at({"nls_relaxed", 0.0}), 1e-11);
    EXPECT_LT(r.max_drift.at({"nlsh_relaxed", 1e-2}), 1e-11);
    EXPECT_GT(r.max_drift.at({"nls", 0.0}), 1e-11);
    for (const auto& row : r.rows) {
        if (row.t == 0.0) {
            EXPECT_LT(row.error, 1e-12) << row.variant;
        }
        if (row.variant.find("relaxed") == std::string::npos) {
            EXPECT_EQ(row.gamma, 1.0);
        }
    }
}

TEST(BoundState, LinearCaseMatchesSpectralOracle) {
    auto c = parse_config("", {"kappa=0", "n=512", "t_end=0.5", "tau_list=1e-3"}, ExperimentKind::bound_state);
    // ARS(4,4,3) is third order on the linear flow; the error should drop 8x per halving
    c.dt = 1e-2;
    const double e1 = *run_bound_state(c).linear_oracle_error;
    c.dt = 5e-3;
    const auto r = run_bound_state(c);
    const double e2 = *r.linear_oracle_error;
    EXPECT_LT(e2, 1e-5);
    EXPECT_NEAR(std::log2(e1 / e2), 3.0, 0.3);
    ASSERT_EQ(r.variants.size(), 2u);
    EXPECT_EQ(r.abs_profile[0].size(), 512u);
}

TEST(BoundState, NlshApproachesNlsAsTauShrinks) {
    const auto c = parse_config("", {"n=512", "t_end=0.5", "dt=5e-3", "tau_list=1e-2,1e-3,1e-4"},
                                ExperimentKind::bound_state);
    const auto r = run_bound_state(c);
    ASSERT_EQ(r.sup_diff.size(), 3u);
    EXPECT_FALSE(r.linear_oracle_error.has_value());
    EXPECT_GT(r.sup_diff[0].second, r.sup_diff[1].second);
    EXPECT_GT(r.sup_diff[1].second, r.sup_diff[2].second);
}

TEST(LinearOracle, ZeroTimeAndPlaneWave) {
    const auto g = make_grid(0, 2 * M_PI, 16);
    const auto u = ComplexField::sample(g, [](double x) { return std::exp(cplx(0, 2 * x)); });
    EXPECT_LT(norm_max(linear_schrodinger_exact(u, 0.0) - u), 1e-15);
    auto want = u;
    want *= std::exp(cplx(0, -4 * 0.3));
    EXPECT_LT(norm_max(linear_schrodinger_exact(u, 0.3) - want), 1e-14);
}

TEST(PhasePortrait, WritesFieldAndOrbits) {
    const auto dir = scratch_dir("phase");
    const auto c = parse_config("", {"n_grid=5", "s_max=5", "output_dir=" + dir.string()},
                                ExperimentKind::phase_portrait);
    std::ostringstream log;
    const auto files = run_experiment(c, log);
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(column_header(files[0]), "q0,q1,dq0,dq1");
    EXPECT_EQ(data_rows(files[0]), 25u);
    EXPECT_EQ(column_header(files[1]), "orbit,s,q0,q1,first_integral");
    const auto pp = run_phase_portrait(c);
    EXPECT_EQ(pp.field.size(), 25u);
    fs::remove_all(dir);
}
