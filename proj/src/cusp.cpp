#include "preshock/cusp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include "preshock/burgers.hpp"
#include "preshock/puiseux.hpp"

namespace preshock {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Integral over [a, b] (offsets from the expansion point) of sum_k d[k] u^k / k!.
double integrate_taylor(const std::vector<double>& d, double a, double b) {
    double acc = 0.0;
    double pa = a, pb = b;
    for (std::size_t k = 0; k < d.size(); ++k) {
        acc += d[k] * (pb - pa) / factorial(static_cast<int>(k) + 1);
        pa *= a;
        pb *= b;
    }
    return acc;
}

// Median of slopes over pairs at least one octave apart in x (any distinct pair when the data
// span less than two octaves).
double theil_sen(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t m = xs.size();
    if (m < 2) return 0.0;
    std::size_t stride = 1;
    while (m / stride > 1500) ++stride;
    double lo = xs[0], hi = xs[0];
    for (double v : xs) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double gap = hi - lo >= 2 * std::log(2.0) ? std::log(2.0) : 1e-12 * std::max(1.0, hi - lo);
    std::vector<double> slopes;
    for (std::size_t i = 0; i < m; i += stride)
        for (std::size_t j = i + stride; j < m; j += stride) {
            const double dx = xs[j] - xs[i];
            if (std::abs(dx) < gap) continue;
            slopes.push_back((ys[j] - ys[i]) / dx);
        }
    if (slopes.empty()) return 0.0;
    const std::size_t mid = slopes.size() / 2;
    std::nth_element(slopes.begin(), slopes.begin() + mid, slopes.end());
    double med = slopes[mid];
    if (slopes.size() % 2 == 0) {
        const double below = *std::max_element(slopes.begin(), slopes.begin() + mid);
        med = 0.5 * (med + below);
    }
    return med;
}

std::vector<int> window_indices(const EulerianProfile& p, const CuspWindow& w) {
    std::vector<int> idx;
    for (int i = 0; i < p.size(); ++i) {
        const double a = std::abs(p.dy[i]);
        if (a > 0 && a >= w.delta_in && a <= w.delta_out) idx.push_back(i);
    }
    return idx;
}

// Least squares of w on {1, s, s^2} over idx; s is scaled by s_ref for conditioning.
SideFit lsq(const EulerianProfile& p, const std::vector<int>& idx, int n, double s_ref, std::vector<double>* resid) {
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        const double s = odd_root(p.dy[idx[r]], 2 * n + 1) / s_ref;
        A(r, 0) = 1.0;
        A(r, 1) = s;
        A(r, 2) = s * s;
        b(r) = p.w[idx[r]];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw Error(Errc::FitDegenerate, "rank-deficient cusp design");
    const Eigen::VectorXd c = qr.solve(b);
    if (resid) {
        const Eigen::VectorXd r = b - A * c;
        resid->assign(r.data(), r.data() + m);
    }
    SideFit f;
    f.samples = m;
    f.b0 = c(0);
    f.b1 = c(1) / s_ref;
    f.b2 = c(2) / (s_ref * s_ref);
    return f;
}

double log_slope(const EulerianProfile& p, const std::vector<int>& idx, const std::vector<double>& v, double shift) {
    std::vector<double> xs, ys;
    for (int i : idx) {
        const double a = std::abs(v[i] - shift);
        if (!(a > 0)) continue;
        xs.push_back(std::log(std::abs(p.dy[i])));
        ys.push_back(std::log(a));
    }
    return theil_sen(xs, ys);
}

} // namespace

double EulerianProfile::y_star_distance(double target) const { return std::abs(wrap_torus(y_star - target)); }

EulerianProfile eulerian_profile(const LagrangianState& s, const BlowupReport& rep, const SolverConfig& cfg) {
    const Params& p = rep.params;
    const int N = s.N();
    const double T = rep.T_star;
    const double dt = T - s.t;
    if (dt < -1e-12 * std::max(1.0, std::abs(T)))
        throw Error(Errc::InconsistentTimes, "T* = " + std::to_string(T) + " precedes the snapshot time " +
                                                 std::to_string(s.t));
    const double c = 1.0 / (2.0 * p.gamma);
    LagrangianState d = LagrangianState::zeros(N);
    if (dt != 0.0) d = rhs(s, p, cfg);

    EulerianProfile pr;
    pr.params = p;
    pr.T = T;
    pr.x_star = rep.x_star;
    const Grid g(N);
    pr.x = g.nodes();
    pr.y.resize(N);
    pr.w.resize(N);
    pr.z.resize(N);
    pr.k.resize(N);
    pr.z_y.resize(N);
    pr.k_y.resize(N);
    Field disp(N);
    for (int i = 0; i < N; ++i) {
        pr.y[i] = s.eta[i] + dt * d.eta[i];
        disp[i] = pr.y[i] - pr.x[i];
        pr.w[i] = s.Wcomp[i] + dt * d.Wcomp[i];
        pr.z[i] = s.Zcomp[i] + dt * d.Zcomp[i];
        pr.k[i] = s.Kcomp[i] + dt * d.Kcomp[i];
        const double S = s.Sigma[i] + dt * d.Sigma[i];
        const double K = s.Kring[i] + dt * d.Kring[i];
        pr.z_y[i] = s.Zring[i] + dt * d.Zring[i] - c * S * K;
        pr.k_y[i] = K;
    }

    const ExtendedFlow flow = extend(s, p);
    const double h = flow.fit_radius();
    const int deg = flow.fit_degree();
    const LocalTaylor at_star(N, rep.x_star, h, deg);
    pr.y_star = rep.x_star + at_star.derivatives(disp, 0)[0];
    const auto wd = at_star.derivatives(pr.w, 2);
    pr.w_taylor = {wd[0], wd[1], 0.5 * wd[2]};
    pr.z_star = at_star.derivatives(pr.z, 0)[0];
    pr.k_star = at_star.derivatives(pr.k, 0)[0];

    pr.dy.resize(N);
    for (int i = 0; i < N; ++i) pr.dy[i] = pr.y[i] - pr.y_star;
    // Near x* integrate eta_x~(., T) cell by cell instead of differencing y.
    const double dxg = g.dx();
    const double reach = 1.0 / p.C0;
    const int i0 = static_cast<int>(std::ceil((rep.x_star + 0.5) / dxg - 1e-12));
    const int cells = static_cast<int>(reach / dxg);
    auto node = [&](int j) { return ((j % N) + N) % N; };
    auto xj = [&](int j) { return -0.5 + j * dxg; };
    {
        const auto dstar = flow.values(rep.x_star, T, deg);
        double acc = integrate_taylor(dstar, 0.0, xj(i0) - rep.x_star);
        pr.dy[node(i0)] = acc;
        for (int j = i0 + 1; j <= i0 + cells; ++j) {
            const double mid = 0.5 * (xj(j - 1) + xj(j));
            acc += integrate_taylor(flow.values(mid, T, deg), -0.5 * dxg, 0.5 * dxg);
            pr.dy[node(j)] = acc;
        }
        acc = integrate_taylor(dstar, 0.0, xj(i0 - 1) - rep.x_star);
        pr.dy[node(i0 - 1)] = acc;
        for (int j = i0 - 2; j >= i0 - 1 - cells; --j) {
            const double mid = 0.5 * (xj(j) + xj(j + 1));
            acc -= integrate_taylor(flow.values(mid, T, deg), -0.5 * dxg, 0.5 * dxg);
            pr.dy[node(j)] = acc;
        }
    }
    for (int j = i0 - 2; j <= i0; ++j)
        pr.dy_local = std::max(pr.dy_local, std::abs(pr.dy[node(j + 1)] - pr.dy[node(j)]));

    if (dt > 0) {
        const LagrangianState dd = tangent_rhs(s, d, d, p, cfg);
        const Field ex = flow.grid_values(T);
        for (int j = i0 - 1 - cells; j <= i0 + cells; ++j) {
            const int i = node(j);
            if (0.5 * dt * dt * std::abs(dd.eta_x[i]) >= 0.01 * std::abs(ex[i]))
                pr.smear_radius = std::max(pr.smear_radius, std::abs(pr.dy[i]));
        }
    }
    return pr;
}

EulerianProfile profile_from_samples(const Params& params, const std::vector<double>& y, const std::vector<double>& w,
                                     double y_star) {
    if (y.size() != w.size()) throw Error(Errc::BadConfig, "sample arrays differ in length");
    EulerianProfile p;
    p.params = params;
    p.y_star = y_star;
    p.x = y;
    p.y = y;
    p.w = w;
    p.dy.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) p.dy[i] = y[i] - y_star;
    p.z.assign(y.size(), 0.0);
    p.k.assign(y.size(), 0.0);
    p.z_y.assign(y.size(), 0.0);
    p.k_y.assign(y.size(), 0.0);
    return p;
}

double theorem_window(int n, double C0) {
    return 1.0 / ((2 * n + 2) * (2 * n + 1) * std::pow(2.0, 2 * n + 2) * std::pow(C0, 2 * n + 1));
}

CuspWindow default_window(const EulerianProfile& p) {
    CuspWindow w;
    w.delta_out = theorem_window(p.params.n, p.params.C0);
    w.delta_in = std::max(4.0 * p.dy_local, 10.0 * p.smear_radius);
    return w;
}

CuspFit fit_cusp(const EulerianProfile& p, int n, const CuspWindow& window) {
    if (!(window.delta_out > window.delta_in))
        throw Error(Errc::FitDegenerate, "empty fit window [" + std::to_string(window.delta_in) + ", " +
                                             std::to_string(window.delta_out) + "]");
    const auto idx = window_indices(p, window);
    std::vector<int> left, right;
    for (int i : idx) (p.dy[i] < 0 ? left : right).push_back(i);
    if (left.size() < 50 || right.size() < 50)
        throw Error(Errc::FitDegenerate, "window holds " + std::to_string(left.size()) + " / " +
                                             std::to_string(right.size()) + " samples left / right of y*, need 50");
    const double s_ref = std::pow(window.delta_out, 1.0 / (2 * n + 1));
    CuspFit f;
    f.n = n;
    f.y_star = p.y_star;
    f.window = window;
    std::vector<double> res;
    const SideFit all = lsq(p, idx, n, s_ref, &res);
    f.b0 = all.b0;
    f.b1 = all.b1;
    f.b2 = all.b2;
    double ss = 0.0;
    for (double r : res) {
        ss += r * r;
        f.residual_max = std::max(f.residual_max, std::abs(r));
    }
    f.residual_rms = std::sqrt(ss / res.size());
    f.left = lsq(p, left, n, s_ref, nullptr);
    f.right = lsq(p, right, n, s_ref, nullptr);
    f.holder_exponent = log_slope(p, idx, p.w, f.b0);
    f.z_slope = log_slope(p, idx, p.z, p.z_star);
    f.k_slope = log_slope(p, idx, p.k, p.k_star);
    f.z_y_slope = log_slope(p, idx, p.z_y, 0.0);
    f.k_y_slope = log_slope(p, idx, p.k_y, 0.0);
    return f;
}

CuspFit fit_cusp(const EulerianProfile& p, int n) { return fit_cusp(p, n, default_window(p)); }

double holder_exponent(const EulerianProfile& p, int, const CuspWindow& window, double b0) {
    return log_slope(p, window_indices(p, window), p.w, b0);
}

double holder_exponent(const EulerianProfile& p, int n, const CuspWindow& window) {
    return fit_cusp(p, n, window).holder_exponent;
}

double holder_exponent(const EulerianProfile& p, int n) { return holder_exponent(p, n, default_window(p)); }

Reconstruction puiseux_reconstruct(const BlowupReport& rep, const std::array<double, 3>& w_taylor, double y_shift,
                                   int terms) {
    const Inversion inv = invert(rep.params.n, rep.a_hi, rep.a_lo, y_shift, terms);
    Reconstruction r;
    r.x_shift = inv.x;
    r.bound = inv.bound;
    r.w = w_taylor[0] + w_taylor[1] * inv.x + w_taylor[2] * inv.x * inv.x;
    return r;
}

std::array<double, 2> model_coefficients(const BlowupReport& rep, const std::array<double, 3>& w_taylor) {
    if (!(rep.a_hi > 0)) throw Error(Errc::BadConfig, "a_hi must be positive");
    return {w_taylor[0], w_taylor[1] * std::pow(rep.a_hi, -1.0 / (2 * rep.params.n + 1))};
}

void write_profile_csv(std::ostream& os, const EulerianProfile& p) {
    os << "x,y,dy,w,z,k,z_y,k_y\n";
    std::ostringstream line;
    line << std::setprecision(17);
    for (int i = 0; i < p.size(); ++i) {
        line.str("");
        line << p.x[i] << ',' << p.y[i] << ',' << p.dy[i] << ',' << p.w[i] << ',' << p.z[i] << ',' << p.k[i] << ','
             << p.z_y[i] << ',' << p.k_y[i] << '\n';
        os << line.str();
    }
}

void read_profile_csv(std::istream& is, EulerianProfile& p) {
    std::string line;
    if (!std::getline(is, line) || line != "x,y,dy,w,z,k,z_y,k_y")
        throw Error(Errc::BadArtifact, "profile CSV header mismatch");
    std::vector<double>* cols[] = {&p.x, &p.y, &p.dy, &p.w, &p.z, &p.k, &p.z_y, &p.k_y};
    for (auto* c : cols) c->clear();
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const char* b = line.data();
        const char* e = b + line.size();
        for (int c = 0; c < 8; ++c) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || (c < 7 && (ptr == e || *ptr != ',')) || (c == 7 && ptr != e))
                throw Error(Errc::BadArtifact, "malformed profile CSV row " + std::to_string(row));
            cols[c]->push_back(v);
            b = ptr + 1;
        }
    }
    if (p.y.empty()) throw Error(Errc::BadArtifact, "profile CSV holds no samples");
}

nlohmann::ordered_json profile_meta_to_json(const EulerianProfile& p) {
    nlohmann::ordered_json j;
    j["params"] = params_to_json(p.params);
    j["samples"] = p.size();
    j["T"] = p.T;
    j["x_star"] = p.x_star;
    j["y_star"] = p.y_star;
    j["y_star_torus"] = wrap_torus(p.y_star);
    j["w_taylor"] = p.w_taylor;
    j["z_star"] = p.z_star;
    j["k_star"] = p.k_star;
    j["dy_local"] = p.dy_local;
    j["smear_radius"] = p.smear_radius;
    return j;
}

EulerianProfile profile_meta_from_json(const nlohmann::ordered_json& j) {
    try {
        EulerianProfile p;
        p.params = params_from_json(j.at("params"));
        p.T = j.at("T").get<double>();
        p.x_star = j.at("x_star").get<double>();
        p.y_star = j.at("y_star").get<double>();
        p.w_taylor = j.at("w_taylor").get<std::array<double, 3>>();
        p.z_star = j.at("z_star").get<double>();
        p.k_star = j.at("k_star").get<double>();
        p.dy_local = j.at("dy_local").get<double>();
        p.smear_radius = j.at("smear_radius").get<double>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadArtifact, std::string("profile metadata: ") + e.what());
    }
}

nlohmann::ordered_json to_json(const CuspFit& f) {
    auto side = [](const SideFit& s) {
        nlohmann::ordered_json j;
        j["samples"] = s.samples;
        j["b0"] = s.b0;
        j["b1"] = s.b1;
        j["b2"] = s.b2;
        return j;
    };
    nlohmann::ordered_json j;
    j["n"] = f.n;
    j["y_star"] = f.y_star;
    j["b0"] = f.b0;
    j["b1"] = f.b1;
    j["b2"] = f.b2;
    j["exponent"] = f.holder_exponent;
    j["window"] = {{"delta_in", f.window.delta_in}, {"delta_out", f.window.delta_out}};
    j["residuals"] = {{"rms", f.residual_rms}, {"max", f.residual_max}};
    j["left"] = side(f.left);
    j["right"] = side(f.right);
    j["z_slope"] = f.z_slope;
    j["k_slope"] = f.k_slope;
    j["z_y_slope"] = f.z_y_slope;
    j["k_y_slope"] = f.k_y_slope;
    return j;
}

} // namespace preshock
