#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "preshock/core.hpp"
#include "preshock/puiseux.hpp"

using namespace preshock;

namespace {

// Independent oracle for ybar: with y = s u(s), the relation s^p = y^p + y^{p+1} becomes
// u = (1 + s u)^{-1/p}. Iterate that on truncated power series in double precision.
std::vector<double> ybar_oracle(int n, int K) {
    const int p = 2 * n + 1;
    std::vector<double> u(K + 1, 0.0);
    u[0] = 1.0;
    for (int pass = 0; pass <= K; ++pass) {
        // t = s u, then (1 + t)^{-1/p} = sum_k binom(-1/p, k) t^k.
        std::vector<double> t(K + 1, 0.0), tk(K + 1, 0.0), out(K + 1, 0.0);
        for (int j = 0; j < K; ++j) t[j + 1] = u[j];
        tk[0] = 1.0;
        double binom = 1.0;
        for (int k = 0; k <= K; ++k) {
            for (int j = 0; j <= K; ++j) out[j] += binom * tk[j];
            binom *= (-1.0 / p - k) / (k + 1);
            std::vector<double> next(K + 1, 0.0);
            for (int a = 0; a <= K; ++a)
                for (int b = 0; a + b <= K; ++b) next[a + b] += tk[a] * t[b];
            tk = next;
        }
        u = out;
    }
    return u;
}

double signed_root(double v, int m) { return std::copysign(std::pow(std::abs(v), 1.0 / m), v); }

// The branch point of y(s) closest to the origin: dx/dy = 0 at y = -p/(p+1).
double analytic_radius(int n) {
    const double p = 2 * n + 1;
    return p / (p + 1) * std::pow(p + 1, -1.0 / p);
}

} // namespace

TEST(Coefficients, LeadingTerms) {
    for (int n = 1; n <= 5; ++n) {
        const PuiseuxSeries& s = coefficients(n, 8);
        EXPECT_EQ(s.exact[0], "1");
        EXPECT_EQ(s.exact[1], "1");
        EXPECT_EQ(s.c.size(), 9u);
        for (double c : s.c) EXPECT_TRUE(std::isfinite(c));
    }
    EXPECT_EQ(coefficients(1, 4).exact[2], "3");
}

TEST(Coefficients, MatchFormalSubstitution) {
    for (int n = 1; n <= 3; ++n) {
        const int K = 14;
        const std::vector<double> u = ybar_oracle(n, K);
        const PuiseuxSeries& s = coefficients(n, 64);
        for (int j = 0; j <= K; ++j) EXPECT_NEAR(s.ybar[j], u[j], 1e-12 * std::max(1.0, std::abs(u[j]))) << n << "," << j;
    }
    // y = s (1 - s/3 + s^2/3 + ...) for n = 1.
    const std::vector<double> u = ybar_oracle(1, 4);
    EXPECT_NEAR(u[1], -1.0 / 3, 1e-15);
    EXPECT_NEAR(u[2], 1.0 / 3, 1e-15);
}

TEST(Coefficients, TruncationIsAPrefix) {
    const PuiseuxSeries& a = coefficients(2, 64);
    const PuiseuxSeries& b = coefficients(2, 20);
    for (int j = 0; j <= 20; ++j) EXPECT_EQ(a.exact[j], b.exact[j]);
    EXPECT_THROW(coefficients(2, 65), Error);
    EXPECT_THROW(coefficients(0, 8), Error);
}

TEST(Coefficients, CsvExport) {
    std::ostringstream os;
    write_coefficients_csv(os, coefficients(1, 3));
    EXPECT_EQ(os.str(), "n,m,c_m,c_m_exact\n1,0,1,1\n1,1,1,1\n1,2,3,3\n1,3," + [] {
        std::ostringstream o;
        o.precision(17);
        o << coefficients(1, 3).c[3];
        return o.str();
    }() + "," + coefficients(1, 3).exact[3] + "\n");
}

TEST(Radius, ConservativeAndStable) {
    for (int n = 1; n <= 3; ++n) {
        const RadiusEstimate e32 = radius_and_M(n, 32), e48 = radius_and_M(n, 48), e64 = radius_and_M(n, 64);
        const double Rn = analytic_radius(n);
        for (const RadiusEstimate& e : {e32, e48, e64}) {
            EXPECT_LE(e.R, Rn) << n;
            EXPECT_GT(e.R, 0.95 * Rn) << n;
            EXPECT_GT(e.M, 1.0);
        }
        EXPECT_NEAR(e48.R / e32.R, 1.0, 0.1);
        EXPECT_TRUE(e64.settled);
        const RadiusEstimate again = radius_and_M(n, 48);
        EXPECT_EQ(again.R, e48.R);
        EXPECT_EQ(again.M, e48.M);
    }
    EXPECT_THROW(radius_and_M(1, 16), Error);
}

TEST(Radius, DefiningRelationOnHalfCircle) {
    for (int n = 1; n <= 3; ++n) {
        const int p = 2 * n + 1;
        const PuiseuxSeries& s = coefficients(n, 48);
        const double r = 0.5 * radius_and_M(n, 48).R;
        for (int k = 0; k < 32; ++k) {
            const std::complex<double> z = std::polar(r, 2 * std::numbers::pi * (k + 0.5) / 32);
            const std::complex<double> y = z * ybar(s, z);
            const std::complex<double> res = std::pow(y, p) + std::pow(y, p + 1) - std::pow(z, p);
            EXPECT_LT(std::abs(res), 1e-8) << n << " " << k;
        }
    }
}

TEST(Invert, PureRootWhenALoVanishes) {
    for (int n = 1; n <= 3; ++n)
        for (double y : {-0.3, -1e-6, 0.0, 2e-4, 0.7}) {
            const Inversion r = invert(n, 0.4, 0.0, y, 12);
            EXPECT_NEAR(r.x, signed_root(y / 0.4, 2 * n + 1), 1e-15);
            EXPECT_EQ(r.bound, 0.0);
        }
}

TEST(Invert, RecoversForwardEvaluation) {
    const double a_hi = 1.0 / 3, a_lo = 0.05, t = 0.1;
    const double y = a_hi * t * t * t + a_lo * std::pow(t, 4);
    const Inversion r = invert(1, a_hi, a_lo, y, 12);
    EXPECT_LE(std::abs(r.x - t), r.bound + 1e-15);
    EXPECT_LT(r.bound, 1e-10);
}

TEST(Invert, CanonicalRelationAgainstRootFinding) {
    const double x = 1e-3;
    const Inversion r = invert(1, 1.0, 1.0, x, 8);
    const double root = bracketed_root([&](double v) { return v * v * v + v * v * v * v - x; }, 0.0, 1.0);
    EXPECT_LE(std::abs(r.x - root), r.bound + 1e-15);
    const Inversion neg = invert(1, 1.0, 1.0, -x, 8);
    const double nroot = bracketed_root([&](double v) { return v * v * v + v * v * v * v + x; }, -0.5, 0.0);
    EXPECT_LE(std::abs(neg.x - nroot), neg.bound + 1e-15);
}

TEST(Invert, DomainAndArguments) {
    const RadiusEstimate est = radius_and_M(1, 64);
    const double lim = certified_radius(1, 1.0, 1.0, est);
    EXPECT_NO_THROW(invert(1, 1.0, 1.0, 0.99 * lim, 8, est));
    try {
        invert(1, 1.0, 1.0, 1.01 * lim, 8, est);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::OutsideConvergenceBall);
    }
    EXPECT_THROW(invert(1, -1.0, 0.1, 1e-6, 8), Error);
    EXPECT_THROW(invert(1, 1.0, 0.1, 1e-6, 80), Error);
}

TEST(Invert, ResidualAndFractionalSeriesBounds) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uhi(0.2, 3.0), ulo(-2.0, 2.0), uf(-0.95, 0.95);
    for (int n = 1; n <= 3; ++n) {
        const int p = 2 * n + 1;
        const RadiusEstimate est = radius_and_M(n, 64);
        for (int trial = 0; trial < 100; ++trial) {
            const double a_hi = uhi(rng), a_lo = ulo(rng);
            const double y = uf(rng) * certified_radius(n, a_hi, a_lo, est);
            const Inversion r = invert(n, a_hi, a_lo, y, 24, est);
            // Residual against |F'| over the certified interval.
            auto dF = [&](double x) { return std::abs(p * a_hi * std::pow(x, p - 1) + (p + 1) * a_lo * std::pow(x, p)); };
            const double slope = std::max({dF(r.x - r.bound), dF(r.x), dF(r.x + r.bound)});
            const double res = -y + a_hi * std::pow(r.x, p) + a_lo * std::pow(r.x, p + 1);
            EXPECT_LE(std::abs(res), slope * r.bound + 1e-14 * std::abs(y) + 1e-300) << n << " " << trial;
            const double u = signed_root(y / a_hi, p);
            const double frac = 4 * est.M * std::abs(a_lo) / (a_hi * est.R) * std::pow(std::abs(y / a_hi), 2.0 / p);
            EXPECT_LE(std::abs(r.x - u), frac * (1 + 1e-12) + 1e-16) << n << " " << trial;
        }
    }
}
