#include "preshock/burgers.hpp"

#include <cmath>

namespace preshock {

double odd_root(double v, int m) {
    if (v == 0.0) return 0.0;
    const double r = std::pow(std::abs(v), 1.0 / m);
    return v < 0 ? -r : r;
}

BurgersProblem prototypical_problem(int n, double speed) {
    if (n < 1) throw Error(Errc::BadConfig, "n must be >= 1");
    BurgersProblem p;
    const int m = 2 * n + 1;
    p.w0 = [m](double x, int order) {
        // Derivatives of -x + x^m/m.
        if (order == 0) return -x + std::pow(x, m) / m;
        double coeff = 1.0 / m;
        for (int i = 0; i < order; ++i) coeff *= (m - i);
        const double mono = order <= m ? coeff * std::pow(x, m - order) : 0.0;
        return (order == 1 ? -1.0 : 0.0) + mono;
    };
    p.linear = -1.0;
    p.remainder = [m](double x) { return std::pow(x, m) / m; };
    p.speed = speed;
    return p;
}

double characteristic(double x, double t, const BurgersProblem& p) {
    const double ct = p.speed * t;
    if (p.remainder) return x * (1.0 + ct * p.linear) + ct * p.remainder(x);
    return x + ct * p.w0(x, 0);
}

double blowup_time(const BurgersProblem& p) {
    const double lo = p.periodic ? -0.5 : p.lo;
    const double hi = p.periodic ? 0.5 : p.hi;
    const int M = p.scan_points;
    const double h = (hi - lo) / M;
    double best = p.w0(lo, 1);
    double xbest = lo;
    for (int i = 1; i <= M; ++i) {
        const double x = lo + i * h;
        const double v = p.w0(x, 1);
        if (v < best) {
            best = v;
            xbest = x;
        }
    }
    // Golden-section refinement around the best sample; keeps the sample if nothing lower is found.
    double a = std::max(lo, xbest - h), b = std::min(hi, xbest + h);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = p.w0(c, 1), fd = p.w0(d, 1);
    for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = p.w0(c, 1);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = p.w0(d, 1);
        }
    }
    best = std::min({best, fc, fd});
    if (!(best < 0.0)) throw Error(Errc::NoBlowup, "inf w0' is not negative");
    return -1.0 / (p.speed * best);
}

double foot_point(double y, double t, const BurgersProblem& p) {
    auto F = [&](double x) { return characteristic(x, t, p) - y; };
    if (p.periodic) {
        // F(x + 1) = F(x) + 1, so shift y into the image of one period.
        const double f0 = characteristic(-0.5, t, p);
        const double m = std::floor(y - f0);
        const double yy = y - m;
        auto G = [&](double x) { return characteristic(x, t, p) - yy; };
        if (G(-0.5) == 0.0) return -0.5 + m;
        return bracketed_root(G, -0.5, 0.5) + m;
    }
    const int M = p.scan_points;
    const double h = (p.hi - p.lo) / M;
    double xa = p.lo, fa = F(xa);
    if (fa == 0.0) return xa;
    for (int i = 1; i <= M; ++i) {
        const double xb = p.lo + i * h;
        const double fb = F(xb);
        if (fb == 0.0) return xb;
        if ((fa < 0) != (fb < 0)) return bracketed_root(F, xa, xb);
        xa = xb;
        fa = fb;
    }
    throw Error(Errc::InversionFailed, "no sign change of the characteristic map on the domain");
}

double evaluate(double y, double t, const BurgersProblem& p, double Tstar) {
    if (t > Tstar * (1.0 + p.t_tol)) throw Error(Errc::PastBlowup, "t exceeds the blowup time");
    if (!p.periodic) {
        // Up to T* the map is nondecreasing, so one bracket over the domain suffices.
        auto F = [&](double x) { return characteristic(x, t, p) - y; };
        const double fa = F(p.lo), fb = F(p.hi);
        if (fa == 0.0) return p.w0(p.lo, 0);
        if (fb == 0.0) return p.w0(p.hi, 0);
        if (fa < 0 && fb > 0) return p.w0(bracketed_root(F, p.lo, p.hi), 0);
    }
    return p.w0(foot_point(y, t, p), 0);
}

double evaluate(double y, double t, const BurgersProblem& p) {
    double Tstar = INFINITY;
    try {
        Tstar = blowup_time(p);
    } catch (const Error& e) {
        if (e.code() != Errc::NoBlowup) throw;
    }
    return evaluate(y, t, p, Tstar);
}

std::function<double(double)> exact_cusp(int n) {
    const int m = 2 * n + 1;
    const double k = std::pow(static_cast<double>(m), 1.0 / m);
    return [m, k](double y) { return -k * odd_root(y, m) + y; };
}

} // namespace preshock
