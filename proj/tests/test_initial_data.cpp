#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "preshock/initial_data.hpp"

using namespace preshock;

namespace {

double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

Field zeros(int N) { return Field(N, 0.0); }

} // namespace

class BaseProfileTest : public ::testing::TestWithParam<int> {};

TEST_P(BaseProfileTest, CoreValues) {
    const int n = GetParam();
    const Params p = Params::make(1.4, n, 1e-3);
    const BaseProfile wb = build_wbar(p, Grid(2048));
    EXPECT_NEAR(wb.value(0.0), 2.5, 1e-14);
    EXPECT_NEAR(wb.slope(0.0), -1.0, 1e-15);
    for (int i = 1; i <= 2 * n - 1; ++i) EXPECT_NEAR(wb.derivative(0.0, i + 1), 0.0, 1e-9) << i;
    EXPECT_NEAR(wb.derivative(0.0, 2 * n + 1), factorial(2 * n), 1e-9 * factorial(2 * n));
    const double edge = 1.0 / p.C0 - 1e-12;
    EXPECT_NEAR(wb.slope(edge), -1.0 + std::pow(p.C0, -2.0 * n), 1e-10);
}

TEST_P(BaseProfileTest, MinimumOnlyAtOrigin) {
    const int n = GetParam();
    const Params p = Params::make(1.4, n, 1e-3);
    const Grid g(2048);
    const BaseProfile wb = build_wbar(p, g);
    const double floor_out = -1.0 + std::pow(p.C0, -2.0 * n);
    const int dense = 8 * g.N;
    for (int m = 0; m < dense; ++m) {
        const double x = -0.5 + static_cast<double>(m) / dense;
        const double s = wb.slope(x);
        EXPECT_GE(s, -1.0 - 1e-15);
        if (std::abs(x) >= 1.0 / p.C0) EXPECT_GE(s, floor_out - 1e-14) << x;
        if (std::pow(x, 2 * n) > 1e-12) EXPECT_GT(s, -1.0) << x;
    }
    for (double r : wbar_bound_ratios(wb, 4 * g.N)) EXPECT_LE(r, 1.0 + 1e-12);
    // Periodic with zero mean slope.
    EXPECT_NEAR(wb.value(0.5 - 1e-12), wb.value(-0.5), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Orders, BaseProfileTest, ::testing::Values(1, 2, 3));

TEST(BaseProfile, RejectsSmallC0AndCoarseGrid) {
    EXPECT_THROW(build_wbar(1, 2.0, Grid(1024)), Error);
    EXPECT_THROW(build_wbar(1, 16.0, Grid(512)), Error);
}

TEST(Basis, DeltaDerivativesAtOrigin) {
    for (int n : {2, 3}) {
        const Params p = Params::make(1.4, n, 1e-3);
        const PerturbationBasis b = build_basis(p, Grid(2048));
        EXPECT_EQ(b.size(), 2 * n - 2);
        for (int j = 1; j <= 2 * n - 2; ++j)
            for (int i = 1; i <= 2 * n - 2; ++i)
                EXPECT_NEAR(b.derivative(j, 0.0, i + 1), i == j ? 1.0 : 0.0, 1e-12) << j << "," << i;
    }
}

TEST(Basis, SupportAndSubstitution) {
    Params p = Params::make(1.4, 2, 1e-3);
    const Grid g(2048);
    const PerturbationBasis b = build_basis(p, g);
    for (int j = 1; j <= b.size(); ++j)
        for (int i = 0; i < g.N; ++i)
            if (std::abs(g.x(i)) * p.C0 >= default_bump_radius(p.C0))
                EXPECT_EQ(b.field(j)[i], 0.0);
    EXPECT_EQ(b.field(1)[0], 0.0);  // x = -1/2

    p.C0 = 3.0;
    const PerturbationBasis b3 = build_basis(p, Grid(1024));
    EXPECT_NEAR(b3.derivative(2, 0.05, 0), std::pow(0.05, 3) / 6, 1e-16);
    EXPECT_GT(b3.Ln(), 0.0);
}

TEST(Basis, NoneForNEqualsOne) {
    try {
        build_basis(Params::make(1.4, 1, 1e-3), Grid(1024));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoBasisNeeded);
    }
}

TEST(Assemble, BaseProfileIsAdmissibleForEveryEpsilon) {
    for (int n : {1, 2})
        for (double eps : {1e-2, 1e-3, 1e-5}) {
            const DataFamily fam = make_family(Params::make(1.4, n, eps), 2048);
            const int N = fam.grid.N;
            const InitialData d = assemble(fam, zeros(N), zeros(N), zeros(N), std::vector<double>(2 * n - 2, 0.0));
            for (int i = 0; i < N; ++i) EXPECT_EQ(d.w0[i], fam.wbar_samples[i]);
        }
}

TEST(Assemble, SmallEntropyPerturbationAccepted) {
    const double eps = 1e-3;
    const DataFamily fam = make_family(Params::make(1.4, 1, eps), 2048);
    const int N = fam.grid.N;
    const double tp = 2 * std::numbers::pi;
    double worst = 0;
    for (int i = 0; i <= 3; ++i) worst = std::max(worst, std::pow(tp, i + 1) / (factorial(i) * std::pow(fam.params.C0, i)));
    Field k0(N);
    for (int i = 0; i < N; ++i) k0[i] = 0.5 * eps * std::sin(tp * fam.grid.x(i)) / worst;
    EXPECT_NO_THROW(assemble(fam, zeros(N), zeros(N), k0, {}));
}

TEST(Assemble, SteepZRejected) {
    const double eps = 1e-3;
    const DataFamily fam = make_family(Params::make(1.4, 1, eps), 2048);
    const int N = fam.grid.N;
    const double tp = 2 * std::numbers::pi;
    Field z0(N);
    for (int i = 0; i < N; ++i) z0[i] = 2 * eps * std::sin(tp * fam.grid.x(i)) / tp;
    try {
        assemble(fam, zeros(N), z0, zeros(N), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NotInAdmissibleSet);
        EXPECT_NE(e.detail().find("z0"), std::string::npos) << e.detail();
    }
}

TEST(Assemble, LambdaBoxEnforced) {
    const double eps = 1e-3;
    const DataFamily fam = make_family(Params::make(1.4, 2, eps), 2048);
    const int N = fam.grid.N;
    const double big = 0.6 * eps / fam.Ln();
    EXPECT_THROW(assemble(fam, zeros(N), zeros(N), zeros(N), {big, 0.0}), Error);
    EXPECT_THROW(assemble(fam, zeros(N), zeros(N), zeros(N), {0.0}), Error);
}

TEST(Assemble, AffineInPerturbationAndLambda) {
    const double eps = 1e-3;
    const DataFamily fam = make_family(Params::make(1.4, 2, eps), 2048);
    const int N = fam.grid.N;
    const Perturbation a = random_perturbation(fam, 11, eps * eps), b = random_perturbation(fam, 12, eps * eps);
    AssembleOptions off;
    off.check_A = off.check_B = off.check_U = off.check_Lambda = off.check_X = false;
    const std::vector<double> la{1e-6, -2e-6}, lb{3e-7, 5e-7};
    const InitialData da = assemble(fam, a.wtilde0, a.z0, a.k0, la, off);
    const InitialData db = assemble(fam, b.wtilde0, b.z0, b.k0, lb, off);
    Field ws(N);
    for (int i = 0; i < N; ++i) ws[i] = a.wtilde0[i] + b.wtilde0[i];
    const InitialData dab = assemble(fam, ws, a.z0, a.k0, {la[0] + lb[0], la[1] + lb[1]}, off);
    for (int i = 0; i < N; ++i)
        EXPECT_NEAR(dab.w0[i] - fam.wbar_samples[i], (da.w0[i] - fam.wbar_samples[i]) + (db.w0[i] - fam.wbar_samples[i]),
                    1e-17 + 1e-15 * std::abs(dab.w0[i]));
}

TEST(Membership, MonotoneInEpsilon) {
    // Anything admissible at a small radius stays admissible at larger ones, and a field
    // filling 50% of one radius is rejected at a quarter of it.
    const DataFamily fam = make_family(Params::make(1.4, 2, 1e-3), 2048);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Perturbation p = random_perturbation(fam, seed, 1e-4);
        EXPECT_FALSE(check_U(p.wtilde0, p.z0, p.k0, fam, 1e-4));
        EXPECT_FALSE(check_U(p.wtilde0, p.z0, p.k0, fam, 1e-3));
        EXPECT_TRUE(check_U(p.wtilde0, p.z0, p.k0, fam, 0.25e-4));
        EXPECT_FALSE(check_X(p.wtilde0, fam));
    }
}

TEST(Perturbation, DeterministicPerSeed) {
    const DataFamily fam = make_family(Params::make(1.4, 1, 1e-3), 1024);
    const Perturbation a = random_perturbation(fam, 5, 1e-3), b = random_perturbation(fam, 5, 1e-3);
    EXPECT_EQ(a.wtilde0, b.wtilde0);
    EXPECT_EQ(a.z0, b.z0);
    EXPECT_EQ(a.k0, b.k0);
    const Perturbation c = random_perturbation(fam, 6, 1e-3);
    EXPECT_NE(a.z0, c.z0);
}

TEST(InitialData, JsonRoundTripIsBitExact) {
    const DataFamily fam = make_family(Params::make(1.4, 1, 1e-3), 1024);
    const Perturbation p = random_perturbation(fam, 9, 1e-3);
    const InitialData d = assemble(fam, p.wtilde0, p.z0, p.k0, {});
    const InitialData e = initial_data_from_json(nlohmann::ordered_json::parse(to_json(d).dump()));
    EXPECT_EQ(e.w0, d.w0);
    EXPECT_EQ(e.z0, d.z0);
    EXPECT_EQ(e.k0, d.k0);
    EXPECT_EQ(e.params.C0, d.params.C0);
    nlohmann::ordered_json bad = to_json(d);
    bad["N"] = 7;
    try {
        initial_data_from_json(bad);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), Errc::BadArtifact);
    }
}
