#include "preshock/initial_data.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace preshock {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMargin = 0.9;  // validated bounds must hold with 10% slack

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double smooth_step_f(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = smooth_step_f(u), b = smooth_step_f(1.0 - u);
    return a / (a + b);
}

Jet smooth_step_f_jet(const Jet& u) {
    // exp(-1/u) underflows long before its jet coefficients matter.
    if (u.value() < 1.0 / 700.0) return Jet(u.order(), 0.0);
    return exp(-(Jet(u.order(), 1.0) / u));
}

std::string fmt_bound(const char* what, int i, double lhs, double rhs) {
    std::ostringstream os;
    os.precision(6);
    os << what << " (i=" << i << "): " << lhs << " vs bound " << rhs;
    return os.str();
}

} // namespace

double default_bump_radius(double C0) { return std::max(C0 / 3.0, std::min(C0 / 2.0, 1.5)); }

double Bump::operator()(double s) const {
    const double a = std::abs(s);
    if (a <= 1.0) return 1.0;
    if (a >= b) return 0.0;
    return smooth_step((b - a) / (b - 1.0));
}

Jet Bump::jet(double x, double scale, int order) const {
    const double s = scale * x;
    const double a = std::abs(s);
    if (a <= 1.0) return Jet(order, 1.0);
    if (a >= b) return Jet(order, 0.0);
    const double sign = s > 0 ? 1.0 : -1.0;
    Jet u = Jet::variable(order, (b - a) / (b - 1.0), -sign * scale / (b - 1.0));
    Jet fa = smooth_step_f_jet(u);
    Jet fb = smooth_step_f_jet(1.0 - u);
    return fa / (fa + fb);
}

BaseProfile::BaseProfile(int n, double C0, double b, double beta) : n_(n), C0_(C0), chi_{b}, beta_(beta) {
    const double r1 = 1.0 / C0, r2 = b / C0;
    auto chi = [&](double x) { return chi_(C0 * x); };
    auto core = [&](double x) { return -1.0 + std::pow(x, 2 * n); };
    auto piecewise = [&](const std::function<double(double)>& g) {
        return integrate(g, 0.0, r1, 8) + integrate(g, r1, r2, 256) + integrate(g, r2, 0.5, 64);
    };
    const double I1 = piecewise([&](double x) { return chi(x) * core(x); });
    const double I2 = piecewise([&](double x) { return (1.0 - chi(x)) * std::cos(kTwoPi * x); });
    const double I3 = piecewise([&](double x) { return 1.0 - chi(x); });
    a_ = (-I1 + beta_ * I2) / I3;

    const int Q = 4096;
    table_h_ = 0.5 / Q;
    table_.assign(Q + 1, 0.0);
    auto sl = [this](double x) { return slope(x); };
    for (int j = 0; j < Q; ++j) table_[j + 1] = table_[j] + integrate(sl, j * table_h_, (j + 1) * table_h_, 1);
}

double BaseProfile::slope(double x) const {
    x = wrap_torus(x);
    const double c = chi_(C0_ * x);
    const double core = -1.0 + std::pow(x, 2 * n_);
    if (c == 1.0) return core;
    return c * core + (1.0 - c) * (a_ - beta_ * std::cos(kTwoPi * x));
}

Jet BaseProfile::slope_jet(double x, int order) const {
    x = wrap_torus(x);
    Jet c = chi_.jet(x, C0_, order);
    Jet X = Jet::variable(order, x);
    Jet core = pow(X, 2 * n_) + -1.0;
    Jet g = a_ - beta_ * cos(kTwoPi * X);
    return c * core + (1.0 - c) * g;
}

double BaseProfile::value(double x) const {
    x = wrap_torus(x);
    const double ax = std::abs(x);
    if (ax <= core_radius()) return 2.5 - x + std::pow(x, 2 * n_ + 1) / (2 * n_ + 1);
    // wbar0 - 5/2 is odd since wbar0' is even.
    const int Q = static_cast<int>(table_.size()) - 1;
    const int j = std::min(Q - 1, static_cast<int>(ax / table_h_));
    auto sl = [this](double s) { return slope(s); };
    const double I = table_[j] + integrate(sl, j * table_h_, ax, 1);
    return 2.5 + (x < 0 ? -I : I);
}

double BaseProfile::derivative(double x, int order) const {
    if (order == 0) return value(x);
    return slope_jet(x, order - 1).derivative(order - 1);
}

Field BaseProfile::samples(const Grid& grid) const {
    Field f(grid.N);
    for (int i = 0; i < grid.N; ++i) f[i] = value(grid.x(i));
    return f;
}

std::vector<double> wbar_bound_ratios(const BaseProfile& p, int dense_points) {
    const int K = 2 * p.n() + 1;
    std::vector<double> sup(K + 1, 0.0);
    for (int m = 0; m < dense_points; ++m) {
        const double x = -0.5 + static_cast<double>(m) / dense_points;
        Jet j = p.slope_jet(x, K);
        for (int i = 0; i <= K; ++i) sup[i] = std::max(sup[i], std::abs(j.derivative(i)));
    }
    for (int i = 0; i <= K; ++i) sup[i] /= factorial(i) * std::pow(p.C0(), i);
    return sup;
}

BaseProfile build_wbar(int n, double C0, const Grid& grid) {
    if (C0 < 3.0) throw Error(Errc::BadConfig, "C0 must be >= 3");
    if (grid.N < 64 * C0) throw Error(Errc::BadConfig, "grid must resolve the core with at least 64 points");
    BaseProfile p(n, C0, default_bump_radius(C0), 0.5);
    const int dense = 8 * grid.N;
    auto ratios = wbar_bound_ratios(p, dense);
    for (std::size_t i = 0; i < ratios.size(); ++i)
        if (ratios[i] > 1.0 + 1e-12)
            throw Error(Errc::ProfileConstructionFailed,
                        fmt_bound("||d^{i+1} wbar0|| / (i! C0^i)", static_cast<int>(i), ratios[i], 1.0));
    const double floor_out = -1.0 + std::pow(C0, -2.0 * n);
    double argmin = 0.0, vmin = INFINITY;
    for (int m = 0; m < dense; ++m) {
        const double x = -0.5 + static_cast<double>(m) / dense;
        const double s = p.slope(x);
        if (s < vmin) {
            vmin = s;
            argmin = x;
        }
        if (std::abs(x) >= 1.0 / C0 && s < floor_out - 1e-14)
            throw Error(Errc::ProfileConstructionFailed,
                        fmt_bound("wbar0' outside the core", 0, s, floor_out));
    }
    // Near 0, -1 + x^{2n} rounds to -1 once x^{2n} drops below half an ulp.
    const double flat = std::max(1.0 / dense, 2.0 * std::pow(0x1.0p-53, 1.0 / (2 * n)));
    if (std::abs(argmin) > flat || vmin < -1.0 - 1e-15)
        throw Error(Errc::ProfileConstructionFailed, "wbar0' minimum not at the origin");
    if (std::abs(p.value(0.5) - p.value(-0.5)) > 1e-12)
        throw Error(Errc::ProfileConstructionFailed, "wbar0 is not periodic");
    return p;
}

BaseProfile build_wbar(const Params& params, const Grid& grid) { return build_wbar(params.n, params.C0, grid); }

PerturbationBasis::PerturbationBasis(int n, double C0, const Bump& chi, const Grid& grid)
    : n_(n), C0_(C0), chi_(chi) {
    for (int j = 1; j <= 2 * n - 2; ++j) {
        Field f(grid.N);
        const double fj = factorial(j + 1);
        for (int i = 0; i < grid.N; ++i) {
            const double x = grid.x(i);
            f[i] = std::pow(x, j + 1) / fj * chi_(C0 * x);
        }
        fields_.push_back(std::move(f));
    }
    // Ln = C0 (2n+2) max_k ||chi^{(k)}||/k!, sampled on the transition layer.
    const int K = 2 * n + 2;
    double mx = 1.0;
    const int samples = 20000;
    for (int m = 0; m <= samples; ++m) {
        const double s = 1.0 + (chi_.b - 1.0) * m / samples;
        Jet jt = chi_.jet(s, 1.0, K);
        for (int k = 0; k <= K; ++k) mx = std::max(mx, std::abs(jt.c[k]));
    }
    Ln_ = C0 * (2 * n + 2) * mx;
}

double PerturbationBasis::derivative(int j, double x, int order) const {
    x = wrap_torus(x);
    Jet X = Jet::variable(order, x);
    Jet p = pow(X, j + 1) * (1.0 / factorial(j + 1));
    return (p * chi_.jet(x, C0_, order)).derivative(order);
}

PerturbationBasis build_basis(const Params& params, const Grid& grid) {
    if (params.n == 1) throw Error(Errc::NoBasisNeeded, "n = 1 has no perturbation basis");
    return PerturbationBasis(params.n, params.C0, Bump{default_bump_radius(params.C0)}, grid);
}

DataFamily make_family(const Params& params, int N) {
    params.validate();
    DataFamily f{params, Grid(N), build_wbar(params, Grid(N)), {}, std::nullopt};
    f.wbar_samples = f.wbar.samples(f.grid);
    if (params.n >= 2) f.basis = build_basis(params, f.grid);
    return f;
}

std::vector<double> derivative_sup_norms(const Field& f, int max_order, int dense) {
    const int N = static_cast<int>(f.size());
    auto s = forward_spectrum(f);
    const int kc = TrigInterpolant(f, true).cutoff();
    std::vector<double> out(max_order + 1, 0.0);
    const double scale = static_cast<double>(dense) / N;
    for (int p = 0; p <= max_order; ++p) {
        std::vector<std::complex<double>> t(dense / 2 + 1, {0.0, 0.0});
        for (int k = (p > 0 ? 1 : 0); k <= kc; ++k)
            t[k] = s[k] * scale * std::pow(std::complex<double>(0.0, kTwoPi * k), p);
        out[p] = max_abs(inverse_spectrum(t, dense));
    }
    (void)N;
    return out;
}

namespace {

// Minimum of f' on the dense grid, from the trimmed spectrum.
double min_slope(const Field& f, int dense) {
    const int N = static_cast<int>(f.size());
    auto s = forward_spectrum(f);
    const int kc = TrigInterpolant(f, true).cutoff();
    std::vector<std::complex<double>> t(dense / 2 + 1, {0.0, 0.0});
    for (int k = 1; k <= kc; ++k) t[k] = s[k] * (static_cast<double>(dense) / N) * std::complex<double>(0.0, kTwoPi * k);
    auto d = inverse_spectrum(t, dense);
    return *std::min_element(d.begin(), d.end());
}

Field diff(const Field& a, const Field& b) {
    Field r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

// First i with ||d^{i+1} f|| / i! >= margin C0^i R, i = 0..2n+1; or ||f|| >= margin R0 when R0 > 0.
std::optional<std::string> check_derivative_bounds(const char* what, const Field& f, const DataFamily& fam, double R0,
                                                   double R) {
    const int n = fam.params.n;
    auto norms = derivative_sup_norms(f, 2 * n + 2, 8 * fam.grid.N);
    if (R0 > 0 && !(norms[0] < kMargin * R0)) return fmt_bound(what, -1, norms[0], kMargin * R0);
    for (int i = 0; i <= 2 * n + 1; ++i) {
        const double lhs = norms[i + 1] / factorial(i);
        const double rhs = kMargin * std::pow(fam.params.C0, i) * R;
        if (!(lhs < rhs)) return fmt_bound(what, i, lhs, rhs);
    }
    return std::nullopt;
}

} // namespace

std::optional<std::string> check_A(const InitialData& d, const DataFamily& fam) {
    const int n = fam.params.n;
    const double eps = fam.params.epsilon;
    const double C0 = fam.params.C0;
    const int dense = 8 * fam.grid.N;
    auto sig = refine(diff(d.w0, d.z0), dense);
    for (double v : sig) {
        if (!(0.5 * v > 0.5 && 0.5 * v < 2.0)) return fmt_bound("sigma0 range", 0, 0.5 * v, 0.5 * v > 1 ? 2.0 : 0.5);
    }
    const double m = min_slope(d.w0, dense);
    if (!(m > -1.0 - kMargin * eps && m < -1.0 + kMargin * eps)) return fmt_bound("min w0'", 0, m, -1.0);
    auto wn = derivative_sup_norms(d.w0, 2 * n + 2, dense);
    for (int i = 0; i <= 2 * n + 1; ++i) {
        const double lhs = wn[i + 1] / factorial(i);
        const double rhs = std::pow(C0, i) * (1.0 + kMargin * eps);
        if (!(lhs < rhs)) return fmt_bound("||d^{i+1} w0|| / i!", i, lhs, rhs);
    }
    if (auto r = check_derivative_bounds("||d^{i+1} z0|| / i!", d.z0, fam, 0.0, eps)) return r;
    if (auto r = check_derivative_bounds("||d^{i+1} k0|| / i!", d.k0, fam, 0.0, eps)) return r;
    return std::nullopt;
}

std::optional<std::string> check_B(const InitialData& d, const DataFamily& fam) {
    const double eps = fam.params.epsilon;
    if (auto r = check_derivative_bounds("w0 - wbar0", diff(d.w0, fam.wbar_samples), fam, eps, eps)) return r;
    if (auto r = check_derivative_bounds("z0", d.z0, fam, eps, eps)) return r;
    if (auto r = check_derivative_bounds("k0", d.k0, fam, 0.0, eps)) return r;
    return std::nullopt;
}

std::optional<std::string> check_U(const Field& wtilde0, const Field& z0, const Field& k0, const DataFamily& fam,
                                   double radius) {
    if (auto r = check_derivative_bounds("wtilde0", wtilde0, fam, 0.5 * radius, 0.5 * radius)) return r;
    if (auto r = check_derivative_bounds("z0", z0, fam, radius, radius)) return r;
    if (auto r = check_derivative_bounds("k0", k0, fam, 0.0, radius)) return r;
    return std::nullopt;
}

std::optional<std::string> check_X(const Field& wtilde0, const DataFamily& fam) {
    const int n = fam.params.n;
    if (n < 2) return std::nullopt;
    TrigInterpolant t(wtilde0, true);
    auto dv = t.derivatives(0.0, 2 * n - 1);
    auto norms = derivative_sup_norms(wtilde0, 2 * n - 1, 2 * fam.grid.N);
    for (int i = 2; i <= 2 * n - 1; ++i) {
        // Relative to the field's own scale: high-order spectral derivatives at a point carry
        // roundoff amplified by (2 pi k)^i.
        const double tol = 1e-6 * norms[i] + 1e-300;
        if (std::abs(dv[i]) > tol) return fmt_bound("d^i wtilde0(0) must vanish", i, dv[i], tol);
    }
    return std::nullopt;
}

std::optional<std::string> check_Lambda(const std::vector<double>& lambda, const DataFamily& fam) {
    const int expected = 2 * fam.params.n - 2;
    if (static_cast<int>(lambda.size()) != expected)
        return "lambda must have length " + std::to_string(expected);
    double s = 0.0;
    for (double l : lambda) s += std::abs(l);
    const double lhs = fam.Ln() * s;
    if (!(lhs < 0.5 * fam.params.epsilon)) return fmt_bound("Ln sum |lambda_j|", 0, lhs, 0.5 * fam.params.epsilon);
    return std::nullopt;
}

InitialData assemble(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                     const std::vector<double>& lambda, const AssembleOptions& opt) {
    const int N = fam.grid.N;
    if (static_cast<int>(wtilde0.size()) != N || static_cast<int>(z0.size()) != N || static_cast<int>(k0.size()) != N)
        throw Error(Errc::BadConfig, "perturbation fields must match the grid");
    if (static_cast<int>(lambda.size()) != std::max(0, 2 * fam.params.n - 2))
        throw Error(Errc::NotInAdmissibleSet, "lambda must have length 2n-2");
    check_finite(wtilde0, "wtilde0");
    check_finite(z0, "z0");
    check_finite(k0, "k0");
    InitialData d;
    d.params = fam.params;
    d.N = N;
    d.wtilde0 = wtilde0;
    d.z0 = z0;
    d.k0 = k0;
    d.lambda = lambda;
    d.w0.resize(N);
    for (int i = 0; i < N; ++i) {
        double v = fam.wbar_samples[i] + wtilde0[i];
        for (std::size_t j = 0; j < lambda.size(); ++j) v += lambda[j] * fam.basis->field(static_cast<int>(j) + 1)[i];
        d.w0[i] = v;
    }
    auto fail = [](const std::string& why) { throw Error(Errc::NotInAdmissibleSet, why); };
    if (opt.check_U) {
        const double r = opt.U_radius > 0 ? opt.U_radius : fam.params.epsilon;
        if (auto e = check_U(wtilde0, z0, k0, fam, r)) fail("U_n: " + *e);
    }
    if (opt.check_X)
        if (auto e = check_X(wtilde0, fam)) fail("X_n: " + *e);
    if (opt.check_Lambda)
        if (auto e = check_Lambda(lambda, fam)) fail("Lambda_n: " + *e);
    if (opt.check_A)
        if (auto e = check_A(d, fam)) fail("A_n: " + *e);
    if (opt.check_B)
        if (auto e = check_B(d, fam)) fail("B_n: " + *e);
    return d;
}

Field project_X(const Field& f, const DataFamily& fam) {
    const int n = fam.params.n;
    if (n < 2) return f;
    const int m = 2 * n - 2;
    // Solve for mu with d^{i+1}(f - sum mu_j wtilde_j)(0) = 0, i = 1..2n-2, using the same
    // spectral evaluation the membership check applies.
    Eigen::MatrixXd M(m, m);
    for (int j = 1; j <= m; ++j) {
        auto db = TrigInterpolant(fam.basis->field(j), true).derivatives(0.0, 2 * n - 1);
        for (int i = 1; i <= m; ++i) M(i - 1, j - 1) = db[i + 1];
    }
    auto lu = M.partialPivLu();
    // A few correction passes, since noise trimming of the combined field can shift the
    // high-order derivatives at 0 slightly.
    Field g = f;
    for (int pass = 0; pass < 4; ++pass) {
        auto dg = TrigInterpolant(g, true).derivatives(0.0, 2 * n - 1);
        Eigen::VectorXd rhs(m);
        for (int i = 1; i <= m; ++i) rhs(i - 1) = dg[i + 1];
        Eigen::VectorXd mu = lu.solve(rhs);
        for (int j = 1; j <= m; ++j) {
            const Field& b = fam.basis->field(j);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= mu(j - 1) * b[i];
        }
    }
    return g;
}

Perturbation random_perturbation(const DataFamily& fam, std::uint64_t seed, double radius, double fill, bool with_w,
                                 bool with_z, bool with_k) {
    std::mt19937_64 rng(seed);
    // Explicit mapping of raw 64-bit draws to [-1, 1), identical on every platform.
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0; };
    const int modes = 3;
    const int N = fam.grid.N;
    auto draw = [&]() {
        std::vector<double> c(2 * modes);
        for (double& v : c) v = uniform();
        Field f(N, 0.0);
        for (int i = 0; i < N; ++i) {
            const double x = fam.grid.x(i);
            for (int m = 1; m <= modes; ++m)
                f[i] += c[2 * m - 2] * std::cos(kTwoPi * m * x) + c[2 * m - 1] * std::sin(kTwoPi * m * x);
        }
        return f;
    };
    Field w = draw(), z = draw(), k = draw();
    const int n = fam.params.n;
    const double C0 = fam.params.C0;
    auto scale_to = [&](Field& f, double R0, double R) {
        auto norms = derivative_sup_norms(f, 2 * n + 2, 8 * N);
        double worst = R0 > 0 ? norms[0] / R0 : 0.0;
        for (int i = 0; i <= 2 * n + 1; ++i) worst = std::max(worst, norms[i + 1] / (factorial(i) * std::pow(C0, i) * R));
        const double s = fill / worst;
        for (double& v : f) v *= s;
    };
    Perturbation p;
    if (with_w) {
        w = project_X(w, fam);
        scale_to(w, 0.5 * radius, 0.5 * radius);
        p.wtilde0 = w;
    } else {
        p.wtilde0.assign(N, 0.0);
    }
    if (with_z) {
        scale_to(z, radius, radius);
        p.z0 = z;
    } else {
        p.z0.assign(N, 0.0);
    }
    if (with_k) {
        scale_to(k, 0.0, radius);
        p.k0 = k;
    } else {
        p.k0.assign(N, 0.0);
    }
    return p;
}

nlohmann::ordered_json params_to_json(const Params& p) {
    nlohmann::ordered_json j;
    j["gamma"] = p.gamma;
    j["alpha"] = p.alpha();
    j["n"] = p.n;
    j["epsilon"] = p.epsilon;
    j["C0"] = p.C0;
    return j;
}

Params params_from_json(const nlohmann::ordered_json& j) {
    try {
        Params p;
        p.gamma = j.at("gamma").get<double>();
        p.n = j.at("n").get<int>();
        p.epsilon = j.at("epsilon").get<double>();
        p.C0 = j.at("C0").get<double>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadArtifact, std::string("params: ") + e.what());
    }
}

nlohmann::ordered_json to_json(const InitialData& d) {
    nlohmann::ordered_json j;
    j["params"] = params_to_json(d.params);
    j["N"] = d.N;
    j["lambda"] = d.lambda;
    j["w0"] = d.w0;
    j["z0"] = d.z0;
    j["k0"] = d.k0;
    j["wtilde0"] = d.wtilde0;
    return j;
}

InitialData initial_data_from_json(const nlohmann::ordered_json& j) {
    try {
        InitialData d;
        d.params = params_from_json(j.at("params"));
        d.N = j.at("N").get<int>();
        d.lambda = j.at("lambda").get<std::vector<double>>();
        d.w0 = j.at("w0").get<Field>();
        d.z0 = j.at("z0").get<Field>();
        d.k0 = j.at("k0").get<Field>();
        d.wtilde0 = j.at("wtilde0").get<Field>();
        const std::size_t N = static_cast<std::size_t>(d.N);
        if (d.w0.size() != N || d.z0.size() != N || d.k0.size() != N || d.wtilde0.size() != N)
            throw Error(Errc::BadArtifact, "field length does not match N");
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadArtifact, std::string("initial data: ") + e.what());
    }
}

} // namespace preshock
