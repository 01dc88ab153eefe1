#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "preshock/burgers.hpp"
#include "preshock/cusp.hpp"

using namespace preshock;

namespace {

std::vector<double> log_samples(double lo, double hi, int per_side) {
    std::vector<double> y;
    for (int side = -1; side <= 1; side += 2)
        for (int i = 0; i < per_side; ++i) y.push_back(side * lo * std::pow(hi / lo, static_cast<double>(i) / (per_side - 1)));
    std::sort(y.begin(), y.end());
    return y;
}

double sroot(double v, int m) { return std::copysign(std::pow(std::abs(v), 1.0 / m), v); }

struct Case {
    Params p;
    DataFamily fam;
    LagrangianState state;
    BlowupReport rep;
};

Case run_case(int n, double eps, int N, std::int64_t seed) {
    const Params p = Params::make(1.4, n, eps);
    DataFamily fam = make_family(p, N);
    Field zero(N, 0.0);
    Perturbation pt{zero, zero, zero};
    if (seed >= 0) pt = random_perturbation(fam, static_cast<std::uint64_t>(seed), eps);
    AssembleOptions ao;
    ao.check_U = seed >= 0;
    const InitialData d = assemble(fam, pt.wtilde0, pt.z0, pt.k0, std::vector<double>(2 * n - 2, 0.0), ao);
    RunResult r = run_to_near_blowup(initialize(d), p);
    BlowupReport rep = analyze(extend(r.state, p));
    return {p, std::move(fam), std::move(r.state), std::move(rep)};
}

// Euler with z0 = k0 = 0 and w0 = wbar0: Burgers at speed (1+alpha)/2.
const Case& reduction() {
    static const Case r = run_case(1, 1e-3, 4096, -1);
    return r;
}

const Case& perturbed() {
    static const Case r = run_case(1, 1e-3, 4096, 3);
    return r;
}

} // namespace

TEST(HolderExponent, CalibrationOnSyntheticCusps) {
    for (int n = 1; n <= 3; ++n) {
        const double beta = 1.0 / (2 * n + 1);
        const std::vector<double> y = log_samples(1e-12, 1e-4, 300);
        std::vector<double> w;
        for (double v : y) w.push_back(2.5 - 1.7 * std::copysign(std::pow(std::abs(v), beta), v) + 0.4 * v);
        const EulerianProfile p = profile_from_samples(Params::make(1.4, n, 1e-3), y, w, 0.0);
        const CuspWindow win{1e-12, 1e-4};
        EXPECT_NEAR(holder_exponent(p, n, win), beta, 0.005) << n;
        const CuspFit f = fit_cusp(p, n, win);
        EXPECT_NEAR(f.b0, 2.5, 1e-6);
        EXPECT_NEAR(f.b1, -1.7, 1e-3);
        EXPECT_LT(f.b1, 0.0);
    }
}

TEST(FitCusp, ModelClassIsExact) {
    for (int n = 1; n <= 2; ++n) {
        const std::vector<double> y = log_samples(1e-10, 1e-5, 100);
        std::vector<double> w;
        for (double v : y) w.push_back(7.0 - 2.0 * sroot(v - 0.0, 2 * n + 1));
        const EulerianProfile p = profile_from_samples(Params::make(1.4, n, 1e-3), y, w, 0.0);
        const CuspFit f = fit_cusp(p, n, CuspWindow{1e-10, 1e-5});
        EXPECT_NEAR(f.b0, 7.0, 1e-12);
        EXPECT_NEAR(f.b1, -2.0, 1e-12);
        EXPECT_NEAR(f.b2, 0.0, 1e-9);
        EXPECT_LT(f.residual_max, 1e-12);
        EXPECT_EQ(f.left.samples, 100);
        EXPECT_EQ(f.right.samples, 100);
    }
}

TEST(FitCusp, ShiftedCenter) {
    const double ys = 0.4375;
    std::vector<double> y = log_samples(1e-10, 1e-5, 80);
    std::vector<double> w;
    for (double& v : y) {
        w.push_back(1.0 + 3.0 * sroot(v, 3));
        v += ys;
    }
    const EulerianProfile p = profile_from_samples(Params::make(1.4, 1, 1e-3), y, w, ys);
    const CuspFit f = fit_cusp(p, 1, CuspWindow{1e-10, 1e-5});
    EXPECT_NEAR(f.b1, 3.0, 1e-6);
    EXPECT_EQ(f.y_star, ys);
}

TEST(FitCusp, ExactBurgersCusps) {
    for (int n = 1; n <= 2; ++n) {
        const auto cusp = exact_cusp(n);
        const std::vector<double> y = log_samples(1e-12, 1e-6, 400);
        std::vector<double> w;
        for (double v : y) w.push_back(cusp(v));
        const EulerianProfile p = profile_from_samples(Params::make(1.4, n, 1e-3), y, w, 0.0);
        const CuspWindow win{1e-12, 1e-6};
        const CuspFit f = fit_cusp(p, n, win);
        const double b1 = -std::pow(2 * n + 1, 1.0 / (2 * n + 1));
        EXPECT_NEAR(f.b0, 0.0, 1e-9);
        EXPECT_NEAR(f.b1 / b1, 1.0, 1e-3);
        EXPECT_NEAR(f.holder_exponent, 1.0 / (2 * n + 1), 0.01);
        EXPECT_NEAR(holder_exponent(p, n, win), 1.0 / (2 * n + 1), 0.01);
    }
}

TEST(FitCusp, DegenerateWindows) {
    const std::vector<double> y = log_samples(1e-10, 1e-5, 40);
    std::vector<double> w;
    for (double v : y) w.push_back(sroot(v, 3));
    const EulerianProfile p = profile_from_samples(Params::make(1.4, 1, 1e-3), y, w, 0.0);
    try {
        fit_cusp(p, 1, CuspWindow{1e-10, 1e-5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::FitDegenerate);
    }
    // Enough samples, but all on one point per side: rank-deficient.
    const std::vector<double> yy(120, 0.0);
    std::vector<double> ww(120, 1.0), yv;
    for (int i = 0; i < 120; ++i) yv.push_back(i < 60 ? -1e-6 : 1e-6);
    const EulerianProfile q = profile_from_samples(Params::make(1.4, 1, 1e-3), yv, ww, 0.0);
    EXPECT_THROW(fit_cusp(q, 1, CuspWindow{1e-7, 1e-5}), Error);
}

TEST(Window, TheoremRadius) {
    EXPECT_DOUBLE_EQ(theorem_window(1, 16.0), 1.0 / (4 * 3 * 16 * 4096.0));
    EXPECT_DOUBLE_EQ(theorem_window(2, 3.0), 1.0 / (6 * 5 * 64 * 243.0));
}

TEST(EulerianProfile, IdentityAtTimeZero) {
    const Params p = Params::make(1.4, 1, 1e-3);
    const DataFamily fam = make_family(p, 1024);
    const Perturbation pt = random_perturbation(fam, 1, 1e-3);
    const InitialData d = assemble(fam, pt.wtilde0, pt.z0, pt.k0, {});
    const LagrangianState s = initialize(d);
    BlowupReport rep;
    rep.params = p;
    rep.T_star = 0.0;
    rep.x_star = 0.0;
    const EulerianProfile pr = eulerian_profile(s, rep);
    ASSERT_EQ(pr.size(), 1024);
    for (int i = 0; i < pr.size(); ++i) {
        EXPECT_NEAR(pr.y[i], fam.grid.x(i), 1e-15);
        EXPECT_EQ(pr.w[i], d.w0[i]);
        EXPECT_EQ(pr.z[i], d.z0[i]);
    }
    EXPECT_NEAR(pr.y_star, 0.0, 1e-14);

    rep.T_star = -0.1;
    try {
        eulerian_profile(s, rep);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InconsistentTimes);
    }
}

TEST(Reconstruct, PureRootForVanishingALo) {
    BlowupReport rep;
    rep.params = Params::make(1.4, 2, 1e-3);
    rep.a_hi = 0.5;
    rep.a_lo = 0.0;
    const std::array<double, 3> wt{2.5, -1.2, 0.3};
    for (double y : {-1e-6, 3e-8}) {
        const Reconstruction r = puiseux_reconstruct(rep, wt, y);
        const double h = sroot(y / 0.5, 5);
        EXPECT_NEAR(r.x_shift, h, 1e-15);
        EXPECT_NEAR(r.w, 2.5 - 1.2 * h + 0.3 * h * h, 1e-14);
        EXPECT_EQ(r.bound, 0.0);
    }
    const auto mc = model_coefficients(rep, wt);
    EXPECT_EQ(mc[0], 2.5);
    EXPECT_NEAR(mc[1], -1.2 * std::pow(0.5, -0.2), 1e-15);
}

TEST(EulerReduction, ProfileIsTheShiftedBurgersCusp) {
    const Case& r = reduction();
    const EulerianProfile pr = eulerian_profile(r.state, r.rep);
    EXPECT_LT(pr.y_star_distance(0.5), 1e-10);
    EXPECT_NEAR(pr.w_taylor[0], 2.5, 1e-10);
    EXPECT_NEAR(pr.w_taylor[1], -1.0, 1e-8);
    const auto exact = exact_cusp(1);
    int checked = 0;
    for (int i = 0; i < pr.size(); ++i)
        if (std::abs(pr.x[i] - pr.x_star) < 0.5 / r.p.C0) {
            // Well inside the core w0 is the cubic, so w - 5/2 = exact_cusp(y - y*).
            EXPECT_NEAR(pr.w[i] - 2.5, exact(pr.dy[i]), 1e-6) << pr.dy[i];
            ++checked;
        }
    EXPECT_GT(checked, 100);

    const CuspFit f = fit_cusp(pr, 1);
    EXPECT_NEAR(f.b1 / -std::cbrt(3.0), 1.0, 0.01);
    EXPECT_NEAR(f.holder_exponent, 1.0 / 3, 0.01);
    EXPECT_NEAR(f.b0, 2.5, 1e-6);

    // Model prediction on the inner half of the window.
    const CuspWindow win = default_window(pr);
    double dev = 0;
    for (int i = 0; i < pr.size(); ++i) {
        const double a = std::abs(pr.dy[i]);
        if (a < win.delta_in || a > 0.5 * win.delta_out) continue;
        dev = std::max(dev, std::abs(puiseux_reconstruct(r.rep, pr.w_taylor, pr.dy[i]).w - 2.5 - exact(pr.dy[i])));
    }
    EXPECT_LT(dev, 1e-6);
}

TEST(EulerRun, FitModelAndSmoothness) {
    const Case& r = perturbed();
    ASSERT_EQ(r.rep.flatness_order, 2);
    const EulerianProfile pr = eulerian_profile(r.state, r.rep);
    EXPECT_LT(pr.y_star_distance(0.5), 0.05);
    const CuspFit f = fit_cusp(pr, 1);
    const double b1 = -std::cbrt(3.0);
    EXPECT_NEAR(f.b1 / b1, 1.0, 0.02);
    EXPECT_LT(f.b1, 0.0);
    EXPECT_NEAR(f.holder_exponent, 1.0 / 3, 0.01);
    const auto mc = model_coefficients(r.rep, pr.w_taylor);
    EXPECT_LE(std::abs(f.b1 - mc[1]), 0.01 * std::abs(f.b1));
    EXPECT_NEAR(f.b0, mc[0], 1e-4);
    // z and k stay C^1 across the cusp.
    EXPECT_GE(f.z_slope, 1.0 / 3 - 0.02);
    EXPECT_GE(f.k_slope, 1.0 / 3 - 0.02);
    EXPECT_GE(f.z_y_slope, -0.02);
    EXPECT_GE(f.k_y_slope, -0.02);
    const CuspWindow w = default_window(pr);
    EXPECT_LE(w.delta_out, theorem_window(1, r.p.C0));
    EXPECT_LT(w.delta_in, w.delta_out);
}

TEST(Artifacts, ProfileCsvAndMetaRoundTrip) {
    const Case& r = reduction();
    const EulerianProfile pr = eulerian_profile(r.state, r.rep);
    std::ostringstream os;
    write_profile_csv(os, pr);
    EulerianProfile back = profile_meta_from_json(nlohmann::ordered_json::parse(profile_meta_to_json(pr).dump()));
    std::istringstream is(os.str());
    read_profile_csv(is, back);
    ASSERT_EQ(back.size(), pr.size());
    EXPECT_EQ(back.y, pr.y);
    EXPECT_EQ(back.dy, pr.dy);
    EXPECT_EQ(back.w, pr.w);
    EXPECT_EQ(back.k_y, pr.k_y);
    EXPECT_EQ(back.y_star, pr.y_star);
    EXPECT_EQ(back.w_taylor, pr.w_taylor);
    EXPECT_EQ(to_json(fit_cusp(back, 1)).dump(), to_json(fit_cusp(pr, 1)).dump());

    std::istringstream bad("x,y,dy,w,z,k,z_y,k_y\n1,2,3\n");
    try {
        read_profile_csv(bad, back);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::BadArtifact);
    }
}
