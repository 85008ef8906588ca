#include "nlsh/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nlsh;

TEST(GridSpec, RejectsBadSizesAndDomains) {
    EXPECT_THROW(GridSpec(0, 1, 7), InvalidArgument);
    EXPECT_THROW(GridSpec(0, 1, 2), InvalidArgument);
    EXPECT_THROW(GridSpec(1, 1, 8), InvalidArgument);
    EXPECT_THROW(GridSpec(2, 1, 8), InvalidArgument);
    EXPECT_THROW(GridSpec(0, INFINITY, 8), InvalidArgument);
    EXPECT_NO_THROW(GridSpec(0, 1, 4));
}

TEST(GridSpec, NodesAndWavenumbersInBinOrder) {
    const GridSpec g(-1.0, 1.0, 8);
    EXPECT_DOUBLE_EQ(g.dx(), 0.25);
    EXPECT_DOUBLE_EQ(g.nodes()[0], -1.0);
    EXPECT_DOUBLE_EQ(g.nodes()[7], 0.75);
    const double k0 = M_PI;
    const double want[] = {0, 1, 2, 3, -4, -3, -2, -1};
    for (int b = 0; b < 8; ++b) EXPECT_DOUBLE_EQ(g.wavenumbers()[b], want[b] * k0);
    EXPECT_EQ(g.nyquist_bin(), 4u);
    EXPECT_EQ(g.d1_multiplier()[4], cplx(0, 0));
    EXPECT_DOUBLE_EQ(g.d2_multiplier()[4].real(), -16 * k0 * k0);
    EXPECT_DOUBLE_EQ(g.d1_multiplier()[1].imag(), k0);
}

TEST(ComplexField, SizeAndGridChecks) {
    const auto g = make_grid(0, 1, 8);
    EXPECT_THROW(ComplexField(g, std::vector<cplx>(7)), InvalidArgument);
    ComplexField a(g), b(make_grid(0, 2, 8)), c(make_grid(0, 1, 8));
    EXPECT_THROW(a += b, GridMismatch);
    EXPECT_NO_THROW(a += c); // equal specs, different objects
}

TEST(ComplexField, AxpyAndFiniteness) {
    const auto g = make_grid(0, 1, 4);
    auto a = ComplexField::sample(g, [](double x) { return x; });
    const auto b = ComplexField::sample(g, [](double) { return 1.0; });
    a.axpy(cplx(0, 2), b);
    EXPECT_EQ(a[1], cplx(0.25, 2));
    EXPECT_TRUE(a.all_finite());
    a[2] = cplx(NAN, 0);
    EXPECT_FALSE(a.all_finite());
}

TEST(Norms, ConventionExamples) {
    // f = 1, n = 4, dx = 0.5
    const auto g = make_grid(0, 2, 4);
    const auto f = ComplexField::sample(g, [](double) { return 1.0; });
    EXPECT_DOUBLE_EQ(norm_l2(f, NormConvention::weighted), std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(norm_l2(f, NormConvention::unweighted), 2.0);
}

TEST(Norms, WeightedOverUnweightedIsSqrtDx) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t n : {4u, 10u, 64u}) {
        const auto g = make_grid(-3, 4, n);
        const auto f = ComplexField::sample(g, [&](double) { return cplx(u(rng), u(rng)); });
        EXPECT_NEAR(norm_l2(f) / norm_l2(f, NormConvention::unweighted), std::sqrt(g->dx()), 1e-15);
    }
}

TEST(Quadrature, RectangleRuleIsSpectralForPeriodicData) {
    const auto g = make_grid(0, 2 * M_PI, 32);
    const auto f = ComplexField::sample(g, [](double x) { return std::exp(std::sin(x)); });
    // int_0^{2pi} e^{sin x} dx = 2 pi I0(1)
    EXPECT_NEAR(quadrature(f).real(), 2 * M_PI * std::cyl_bessel_i(0.0, 1.0), 1e-13);
}

TEST(Derivatives, MatchAnalyticForms) {
    const auto g = make_grid(-36, 36, 1024);
    const auto f = ComplexField::sample(g, [](double x) { return 1.0 / std::cosh(x); });
    const auto d1 = first_derivative(f);
    const auto d2 = second_derivative(f);
    double e1 = 0, e2 = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double x = g->nodes()[j];
        const double s = 1 / std::cosh(x), t = std::tanh(x);
        e1 = std::max(e1, std::abs(d1[j] - cplx(-s * t)));
        e2 = std::max(e2, std::abs(d2[j] - cplx(s - 2 * s * s * s)));
    }
    EXPECT_LT(e1, 1e-12);
    EXPECT_LT(e2, 1e-11);
}

TEST(Derivatives, SechOnSixteenLimitedByWrapMismatch) {
    // sech(16) ~ 2.25e-7 is the periodic-extension jump in f'; D cannot beat it.
    const auto g = make_grid(-16, 16, 2048);
    const auto f = ComplexField::sample(g, [](double x) { return 1.0 / std::cosh(x); });
    const auto d1 = first_derivative(f);
    double e1 = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double x = g->nodes()[j];
        e1 = std::max(e1, std::abs(d1[j] - cplx(-std::tanh(x) / std::cosh(x))));
    }
    EXPECT_LT(e1, 2.0 / std::cosh(16.0));
}

TEST(Derivatives, PlaneWaveEigenfunction) {
    const auto g = make_grid(-16, 16, 64);
    const double k1 = 2 * M_PI / 32;
    const auto f = ComplexField::sample(g, [&](double x) { return std::exp(cplx(0, 3 * k1 * x)); });
    const auto c = ComplexField::sample(g, [](double) { return cplx(2, -1); });
    auto want1 = f;
    want1 *= cplx(0, 3 * k1);
    auto want2 = f;
    want2 *= -9 * k1 * k1;
    EXPECT_LT(norm_max(first_derivative(f) - want1), 1e-13);
    EXPECT_LT(norm_max(second_derivative(f) - want2), 1e-13);
    EXPECT_LT(norm_max(first_derivative(c)), 1e-14);
    EXPECT_LT(norm_max(second_derivative(c)), 1e-14);
}

TEST(Quadrature, SpecExamples) {
    const auto g = make_grid(-16, 16, 2048);
    EXPECT_NEAR(quadrature(ComplexField::sample(g, [](double) { return 1.0; })).real(), 32.0, 1e-12);
    EXPECT_LT(std::abs(quadrature(ComplexField::sample(g, [](double x) { return std::sin(2 * M_PI * x / 32); }))),
              1e-13);
    const auto s2 = ComplexField::sample(g, [](double x) { return 1 / (std::cosh(x) * std::cosh(x)); });
    EXPECT_NEAR(quadrature(s2).real(), 2 * std::tanh(16.0), 1e-12);
}

TEST(Derivatives, NyquistModeIsAnnihilatedByD) {
    const auto g = make_grid(0, 1, 16);
    // e^{i pi x / dx} = (-1)^j, the Nyquist mode
    auto f = ComplexField(g);
    for (std::size_t j = 0; j < 16; ++j) f[j] = (j % 2) ? -1.0 : 1.0;
    EXPECT_LT(norm_max(first_derivative(f)), 1e-13);
    EXPECT_GT(norm_max(second_derivative(f)), 1.0);
}

TEST(Derivatives, SkewHermitianD) {
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    const auto g = make_grid(-1, 2, 128);
    const auto a = ComplexField::sample(g, [&](double) { return cplx(nd(rng), nd(rng)); });
    const auto b = ComplexField::sample(g, [&](double) { return cplx(nd(rng), nd(rng)); });
    const cplx lhs = inner(a, first_derivative(b));
    const cplx rhs = -inner(first_derivative(a), b);
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * norm_l2(a) * norm_l2(first_derivative(b)));
    // D2 is self-adjoint and negative semidefinite
    EXPECT_LT(std::abs(inner(a, second_derivative(b)) - inner(second_derivative(a), b)), 1e-9);
    EXPECT_LE(inner(a, second_derivative(a)).real(), 0.0);
}

TEST(Dealias, KeepsLowModesRemovesHigh) {
    const std::size_t n = 48;
    const auto g = make_grid(0, 2 * M_PI, n);
    auto low = ComplexField::sample(g, [](double x) { return std::exp(cplx(0, 16 * x)); });
    auto high = ComplexField::sample(g, [](double x) { return std::exp(cplx(0, -17 * x)); });
    const auto low0 = low;
    dealias_two_thirds(low);
    dealias_two_thirds(high);
    EXPECT_LT(norm_max(low - low0), 1e-13);
    EXPECT_LT(norm_max(high), 1e-13);
}

TEST(InnerProduct, ConjugateLinearInFirstArgument) {
    const auto g = make_grid(0, 1, 4);
    const auto a = ComplexField::sample(g, [](double) { return cplx(0, 1); });
    const auto b = ComplexField::sample(g, [](double) { return 1.0; });
    EXPECT_EQ(inner(a, b), cplx(0, -1)); // dx * 4 * conj(i)
}
