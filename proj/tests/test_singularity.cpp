#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "preshock/singularity.hpp"

using namespace preshock;

namespace {

InitialData unperturbed(const DataFamily& fam) {
    const Field zero(fam.grid.N, 0.0);
    AssembleOptions ao;
    ao.check_U = false;
    return assemble(fam, zero, zero, zero, std::vector<double>(std::max(0, 2 * fam.params.n - 2), 0.0), ao);
}

struct Case {
    Params p;
    DataFamily fam;
    RunResult run;
    ExtendedFlow flow;
};

Case burgers_case(int n, double gamma, int N) {
    const Params p = Params::make(gamma, n, 1e-3);
    DataFamily fam = make_family(p, N);
    RunResult run = run_to_near_blowup(initialize(unperturbed(fam)), p);
    ExtendedFlow flow = extend(run.state, p);
    return {p, std::move(fam), std::move(run), std::move(flow)};
}

Case perturbed_case(int n, int N, std::uint64_t seed) {
    const double eps = 1e-3;
    const Params p = Params::make(1.4, n, eps);
    DataFamily fam = make_family(p, N);
    const Perturbation pt = random_perturbation(fam, seed, n == 1 ? eps : eps * eps);
    AssembleOptions ao;
    ao.U_radius = n == 1 ? eps : eps * eps;
    const InitialData d = assemble(fam, pt.wtilde0, pt.z0, pt.k0, std::vector<double>(2 * n - 2, 0.0), ao);
    RunResult run = run_to_near_blowup(initialize(d), p);
    ExtendedFlow flow = extend(run.state, p);
    return {p, std::move(fam), std::move(run), std::move(flow)};
}

const Case& burgers1() {
    static const Case c = burgers_case(1, 2.0, 1024);
    return c;
}

const Case& generic1() {
    static const Case c = perturbed_case(1, 1024, 2);
    return c;
}

} // namespace

TEST(Extend, BurgersLinesAreExact) {
    const Case& c = burgers1();
    const double k = 0.5 * (1 + c.p.alpha());
    const Field at_stop = c.flow.grid_values(c.flow.T_stop());
    EXPECT_EQ(at_stop, c.run.state.eta_x);
    for (double t : {0.0, 0.5, 1.0, 4.0 / 3.0}) {
        const Field v = c.flow.grid_values(t);
        for (int i = 0; i < c.fam.grid.N; ++i)
            EXPECT_NEAR(v[i], 1 + k * t * c.fam.wbar.slope(c.fam.grid.x(i)), 1e-9) << t;
    }
    for (double x : {-0.01, 0.0, 0.02}) {
        EXPECT_NEAR(c.flow.rate(x), k * c.fam.wbar.slope(x), 1e-9);
        EXPECT_NEAR(c.flow.rate(x, 2), k * c.fam.wbar.derivative(x, 3), 1e-6);
    }
}

TEST(Extend, UniformRateKeepsMinimumLocation) {
    const int N = 1024;
    const Grid g(N);
    Field ex(N), rate(N, -0.7);
    for (int i = 0; i < N; ++i) ex[i] = 1.5 + std::cos(2 * std::numbers::pi * (g.x(i) - 0.1));
    const ExtendedFlow f(Params::make(1.4, 1, 1e-3), 0.3, ex, rate);
    const MinLoc m0 = min_with_location(f.grid_values(0.3));
    for (double t : {0.0, 0.9, 2.0}) {
        const MinLoc m = min_with_location(f.grid_values(t));
        EXPECT_EQ(m.index, m0.index);
        EXPECT_NEAR(m.x, m0.x, 1e-9);
    }
}

TEST(G, BurgersZeroAtPrototypicalPoint) {
    const Case& c = burgers1();
    const double Ts = 2 / (1 + c.p.alpha());
    const auto g = G(0.0, Ts, c.flow);
    EXPECT_NEAR(g[0], 0.0, 1e-9);
    EXPECT_NEAR(g[1], 0.0, 1e-9);
    const auto g0 = G(0.0, 0.0, c.flow);
    EXPECT_NEAR(g0[1], -2 / (1 + c.p.alpha()), 1e-9);
}

TEST(G, JacobianMatchesDifferences) {
    const Case& c = generic1();
    const double x = 3e-4, t = 2 / (1 + c.p.alpha()) * 0.999, h = 1e-6;
    const auto J = DG(x, t, c.flow);
    const auto gxp = G(x + h, t, c.flow), gxm = G(x - h, t, c.flow);
    const auto gtp = G(x, t + h, c.flow), gtm = G(x, t - h, c.flow);
    EXPECT_NEAR(J[0], (gxp[0] - gxm[0]) / (2 * h), 1e-5 * (1 + std::abs(J[0])));
    EXPECT_NEAR(J[1], (gtp[0] - gtm[0]) / (2 * h), 1e-5 * (1 + std::abs(J[1])));
    EXPECT_NEAR(J[2], (gxp[1] - gxm[1]) / (2 * h), 1e-6);
    EXPECT_NEAR(J[3], (gtp[1] - gtm[1]) / (2 * h), 1e-6);
}

TEST(G, SmallAtInitialGuessForGenericData) {
    const Case& c = generic1();
    const double R = 1 / (3 * (1 + c.p.alpha()) * c.p.C0);
    const auto g = G(0.0, 2 / (1 + c.p.alpha()), c.flow);
    EXPECT_LT(std::hypot(g[0], g[1]), R / 3);
}

TEST(Newton, BurgersPrototypicalPoint) {
    for (double gamma : {1.4, 2.0}) {
        const Case c = burgers_case(1, gamma, 1024);
        const NewtonResult r = newton_G(c.flow);
        EXPECT_NEAR(r.x, 0.0, 1e-8);
        EXPECT_NEAR(r.t, 2 / (1 + c.p.alpha()), 1e-8);
        EXPECT_LE(r.residual, 1e-10);
        const auto fz = first_zero(c.flow);
        EXPECT_NEAR(fz[0], 0.0, 1e-6);
        EXPECT_NEAR(fz[1], 2 / (1 + c.p.alpha()), 1e-8);
    }
}

TEST(Newton, TranslationEquivariance) {
    const Params p = Params::make(1.4, 1, 1e-3);
    const DataFamily fam = make_family(p, 1024);
    const Field zero(fam.grid.N, 0.0);
    const double a = 0.37 / fam.grid.N;
    Field w0(fam.grid.N);
    for (int i = 0; i < fam.grid.N; ++i) w0[i] = fam.wbar.value(fam.grid.x(i) - a);
    const RunResult run = run_to_near_blowup(initialize(w0, zero, zero, p), p);
    const NewtonResult r = newton_G(extend(run.state, p));
    const NewtonResult r0 = newton_G(burgers_case(1, 1.4, 1024).flow);
    EXPECT_NEAR(r.x - r0.x, a, 1e-8);
    EXPECT_NEAR(r.t, r0.t, 1e-8);
}

TEST(Analyze, GenericDataN1) {
    const Case& c = generic1();
    const BlowupReport rep = analyze(c.flow);
    EXPECT_EQ(rep.flatness_order, 2);
    EXPECT_LT(std::abs(rep.x_star), 20 * c.p.epsilon);
    EXPECT_LE(std::abs(rep.derivatives[0]), 1e-10);
    EXPECT_LE(std::abs(rep.derivatives[1]), 1e-10 * rep.flatness_scale + 1e-10);
    EXPECT_GT(rep.a_hi, 1.0 / (2 * 3));
    EXPECT_TRUE(rep.min_location_ok);
    EXPECT_TRUE(rep.outer_floor_ok);
    EXPECT_TRUE(rep.core_2n_ok);
    EXPECT_TRUE(rep.eta_xt_bounds_ok);
    EXPECT_TRUE(rep.a_hi_ok);
    EXPECT_TRUE(rep.f.empty());
    const double Ts = 2 / (1 + c.p.alpha());
    EXPECT_LT(std::hypot(rep.x_star, rep.T_star - Ts), rep.newton.ball_radius);
    EXPECT_GE(rep.T_star, c.flow.T_stop());

    const BlowupReport back = blowup_report_from_json(nlohmann::ordered_json::parse(to_json(rep).dump()));
    EXPECT_EQ(back.x_star, rep.x_star);
    EXPECT_EQ(back.T_star, rep.T_star);
    EXPECT_EQ(back.derivatives, rep.derivatives);
    EXPECT_EQ(back.a_lo, rep.a_lo);
    EXPECT_EQ(to_json(back).dump(), to_json(rep).dump());
}

TEST(Analyze, BurgersFlatnessOrderTwo) {
    const BlowupReport rep = analyze(burgers1().flow);
    EXPECT_EQ(rep.flatness_order, 2);
    EXPECT_NEAR(rep.a_hi, 0.5 * (1 + burgers1().p.alpha()) * rep.T_star * 2 / 6, 1e-6);
}

TEST(Analyze, OffManifoldN2IsOrderTwo) {
    // A lambda_2 kick of 0.1 eps / L_n moves the data well off the manifold.
    const Params p = Params::make(1.4, 2, 1e-3);
    const DataFamily fam = make_family(p, 1024);
    const Field zero(fam.grid.N, 0.0);
    const InitialData d = assemble(fam, zero, zero, zero, {0.0, 0.1 * p.epsilon / fam.Ln()});
    const BlowupReport rep = analyze(extend(run_to_near_blowup(initialize(d), p).state, p));
    EXPECT_EQ(rep.flatness_order, 2);
    EXPECT_EQ(rep.f.size(), 2u);
    EXPECT_GT(rep.f[1], 0.0);
    EXPECT_TRUE(rep.core_2n_ok);
}

TEST(Analyze, IndependentOfGridRefinement) {
    const BlowupReport a = analyze(perturbed_case(1, 1024, 5).flow);
    const BlowupReport b = analyze(perturbed_case(1, 2048, 5).flow);
    EXPECT_NEAR(a.x_star, b.x_star, 1e-6);
    EXPECT_NEAR(a.T_star, b.T_star, 1e-6);
}

TEST(Flatness, OddLeadingDerivativeIsUndetermined) {
    const int N = 1024;
    const Grid g(N);
    Field ex(N), rate(N, -0.75);
    for (int i = 0; i < N; ++i) ex[i] = 1.2 + 0.2 * std::sin(2 * std::numbers::pi * g.x(i));
    const ExtendedFlow f(Params::make(1.4, 1, 1e-3), 0.5, ex, rate);
    try {
        flatness_order(f, 0.0, 0.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::FlatnessUndetermined);
    }
}

TEST(FirstZero, NoBlowupForIncreasingEtaX) {
    const int N = 256;
    const ExtendedFlow f(Params::make(1.4, 1, 1e-3), 0.5, Field(N, 1.0), Field(N, 0.1));
    try {
        first_zero(f);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoBlowup);
    }
}
