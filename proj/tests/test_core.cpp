#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "preshock/core.hpp"
#include "preshock/initial_data.hpp"

using namespace preshock;

namespace {

constexpr double kPi = std::numbers::pi;

Field sample(int N, const std::function<double(double)>& f) {
    Grid g(N);
    Field v(N);
    for (int i = 0; i < N; ++i) v[i] = f(g.x(i));
    return v;
}

} // namespace

TEST(Grid, NodesAndSpacing) {
    Grid g(8);
    EXPECT_DOUBLE_EQ(g.dx(), 0.125);
    EXPECT_DOUBLE_EQ(g.x(0), -0.5);
    EXPECT_DOUBLE_EQ(g.x(4), 0.0);
    EXPECT_THROW(Grid(12), Error);
}

TEST(Params, AlphaAndValidation) {
    Params p = Params::make(1.4, 1, 1e-3);
    EXPECT_DOUBLE_EQ(p.alpha(), 0.2);
    EXPECT_NO_THROW(p.validate());
    p.epsilon = 0.3;
    EXPECT_THROW(p.validate(), Error);
    p = Params::make(1.4, 0, 1e-3);
    EXPECT_THROW(p.validate(), Error);
    p = Params::make(1.4, 1, 1e-3);
    p.C0 = 2.0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(PeriodicDerivative, SineSpectral) {
    const int N = 256;
    const Field f = sample(N, [](double x) { return std::sin(2 * kPi * x); });
    const Field d = periodic_derivative(f, 1);
    Grid g(N);
    for (int i = 0; i < N; ++i) EXPECT_NEAR(d[i], 2 * kPi * std::cos(2 * kPi * g.x(i)), 1e-10);
}

TEST(PeriodicDerivative, ConstantGivesZero) {
    const Field f(128, 3.25);
    for (int order = 1; order <= 6; ++order)
        for (double v : periodic_derivative(f, order)) EXPECT_NEAR(v, 0.0, 1e-12);
    for (double v : periodic_derivative(f, 1, DerivMethod::central_fd)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(PeriodicDerivative, FourierModesRelativeError) {
    const int N = 64;
    for (int k = 1; k < N / 2; ++k) {
        const Field c = sample(N, [k](double x) { return std::cos(2 * kPi * k * x); });
        for (int order = 1; order <= 4; ++order) {
            const Field d = periodic_derivative(c, order);
            const double scale = std::pow(2 * kPi * k, order);
            // Above order 2, roundoff in the top modes amplified by (N/2)^order dominates a low
            // mode's error, so measure against the operator norm instead.
            const double ref = order <= 2 ? scale : std::pow(kPi * N, order);
            Grid g(N);
            double err = 0.0;
            for (int i = 0; i < N; ++i) {
                // d^order cos = scale * cos(theta + order pi/2)
                const double exact = scale * std::cos(2 * kPi * k * g.x(i) + order * kPi / 2);
                err = std::max(err, std::abs(d[i] - exact));
            }
            EXPECT_LT(err / ref, 1e-12) << "k=" << k << " order=" << order;
        }
    }
}

TEST(PeriodicDerivative, TranslationEquivariance) {
    const int N = 128;
    const Field f = sample(N, [](double x) { return std::exp(std::sin(2 * kPi * x)) + 0.3 * std::cos(6 * kPi * x); });
    const int shift = 17;
    Field g(N);
    for (int i = 0; i < N; ++i) g[i] = f[(i + shift) % N];
    for (int order = 1; order <= 3; ++order) {
        const Field df = periodic_derivative(f, order);
        const Field dg = periodic_derivative(g, order);
        // Roundoff level of the transform, amplified by the operator norm (pi N)^order.
        const double tol = 1e-14 * std::pow(kPi * N, order) * max_abs(f);
        for (int i = 0; i < N; ++i) EXPECT_NEAR(dg[i], df[(i + shift) % N], tol);
    }
}

TEST(PeriodicDerivative, CentralFdIsFourthOrder) {
    auto err = [](int N) {
        const Field f = sample(N, [](double x) { return std::sin(2 * kPi * x); });
        const Field d = periodic_derivative(f, 1, DerivMethod::central_fd);
        Grid g(N);
        double e = 0.0;
        for (int i = 0; i < N; ++i) e = std::max(e, std::abs(d[i] - 2 * kPi * std::cos(2 * kPi * g.x(i))));
        return e;
    };
    EXPECT_GT(err(64) / err(128), 14.0);
}

TEST(PeriodicDerivative, RejectsNonFinite) {
    Field f(32, 0.0);
    f[3] = std::nan("");
    try {
        periodic_derivative(f, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonFiniteField);
    }
}

TEST(PeriodicDerivative, WbarCoreSlope) {
    // d/dx of wbar0 against the closed-form slope of the constructed profile.
    const Params p = Params::make(1.4, 1, 1e-3);
    const int N = 4096;
    const Grid g(N);
    const BaseProfile wb = build_wbar(p, g);
    const Field d = periodic_derivative(wb.samples(g), 1);
    for (int i = 0; i < N; ++i) {
        const double x = g.x(i);
        EXPECT_NEAR(d[i], wb.slope(x), 1e-8) << x;
    }
}

TEST(MinWithLocation, Cosine) {
    const Field f = sample(256, [](double x) { return std::cos(2 * kPi * x); });
    const MinLoc m = min_with_location(f);
    EXPECT_NEAR(m.value, -1.0, 1e-12);
    EXPECT_NEAR(std::abs(m.x), 0.5, 1e-12);
    EXPECT_EQ(m.index, 0);
}

TEST(MinWithLocation, ConstantTieSmallestIndex) {
    const MinLoc m = min_with_location(Field(64, 3.0));
    EXPECT_EQ(m.value, 3.0);
    EXPECT_EQ(m.index, 0);
}

TEST(MinWithLocation, ShiftByConstant) {
    const Field f = sample(512, [](double x) { return std::pow(std::sin(kPi * (x - 0.1234)), 2) + 0.1 * x * x; });
    const MinLoc a = min_with_location(f);
    for (double c : {-2.5, 0.1, 7.0}) {
        Field g = f;
        for (double& v : g) v += c;
        const MinLoc b = min_with_location(g);
        EXPECT_NEAR(b.value, a.value + c, 1e-12 * (1 + std::abs(c)));
        EXPECT_NEAR(b.x, a.x, 1e-9);  // vertex from rounded f + c
        EXPECT_EQ(b.index, a.index);
    }
}

TEST(WrapTorus, Range) {
    EXPECT_DOUBLE_EQ(wrap_torus(0.5), -0.5);
    EXPECT_DOUBLE_EQ(wrap_torus(2.25), 0.25);
    EXPECT_DOUBLE_EQ(wrap_torus(-0.75), 0.25);
}

TEST(LocalTaylor, ExactOnPolynomials) {
    const int N = 2048;
    const Field f = sample(N, [](double x) { return 1 - 2 * x + 3 * x * x * x - 0.5 * std::pow(x, 5); });
    const LocalTaylor lt(N, 0.01, 0.05, 6);
    const auto d = lt.derivatives(f, 5);
    const double x = 0.01;
    EXPECT_NEAR(d[0], 1 - 2 * x + 3 * x * x * x - 0.5 * std::pow(x, 5), 1e-13);
    EXPECT_NEAR(d[1], -2 + 9 * x * x - 2.5 * std::pow(x, 4), 1e-11);
    EXPECT_NEAR(d[3], 18 - 30 * x * x, 1e-6);
    EXPECT_NEAR(d[5], -60, 1e-2);
}

TEST(TrigInterpolant, ReproducesOffGridValues) {
    const int N = 128;
    auto fx = [](double x) { return std::cos(2 * kPi * x) + 0.25 * std::sin(10 * kPi * x); };
    const TrigInterpolant ti(sample(N, fx));
    for (double x : {-0.4321, 0.0123, 0.377}) {
        EXPECT_NEAR(ti(x), fx(x), 1e-13);
        EXPECT_NEAR(ti(x, 1), -2 * kPi * std::sin(2 * kPi * x) + 0.25 * 10 * kPi * std::cos(10 * kPi * x), 1e-10);
    }
}

TEST(Quadrature, GaussLegendreAndRoot) {
    EXPECT_NEAR(integrate([](double x) { return std::exp(x); }, 0.0, 1.0), std::exp(1.0) - 1.0, 1e-14);
    EXPECT_NEAR(bracketed_root([](double x) { return x * x * x - 2; }, 0.0, 2.0), std::cbrt(2.0), 1e-14);
    EXPECT_THROW(bracketed_root([](double x) { return x * x + 1; }, -1.0, 1.0), Error);
}
