#include "preshock/singularity.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace preshock {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double torus_distance(double a, double b) { return std::abs(wrap_torus(a - b)); }

} // namespace

ExtendedFlow::ExtendedFlow(const Params& params, double T_stop, const Field& eta_x, const Field& eta_xt,
                           double fit_radius, int fit_degree)
    : params_(params), T_stop_(T_stop), eta_x_(eta_x), eta_xt_(eta_xt),
      h_(fit_radius > 0 ? fit_radius : 0.75 / params.C0), degree_(fit_degree > 0 ? fit_degree : 2 * params.n + 4) {
    if (eta_x.size() != eta_xt.size()) throw Error(Errc::BadConfig, "eta_x and eta_xt sizes differ");
    check_finite(eta_x, "eta_x snapshot");
    check_finite(eta_xt, "eta_xt snapshot");
}

void ExtendedFlow::values_and_rates(double x, double t, int max_order, std::vector<double>& v,
                                    std::vector<double>& r) const {
    const LocalTaylor fit(N(), x, h_, std::max(degree_, max_order));
    v = fit.derivatives(eta_x_, max_order);
    r = fit.derivatives(eta_xt_, max_order);
    for (int i = 0; i <= max_order; ++i) v[i] += (t - T_stop_) * r[i];
}

std::vector<double> ExtendedFlow::values(double x, double t, int max_order) const {
    std::vector<double> v, r;
    values_and_rates(x, t, max_order, v, r);
    return v;
}

std::vector<double> ExtendedFlow::rates(double x, int max_order) const {
    const LocalTaylor fit(N(), x, h_, std::max(degree_, max_order));
    return fit.derivatives(eta_xt_, max_order);
}

double ExtendedFlow::value(double x, double t, int order) const { return values(x, t, order)[order]; }

double ExtendedFlow::rate(double x, int order) const { return rates(x, order)[order]; }

Field ExtendedFlow::grid_values(double t) const {
    Field v(eta_x_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = eta_x_[i] + (t - T_stop_) * eta_xt_[i];
    return v;
}

ExtendedFlow extend(const LagrangianState& s, const Params& params, double fit_radius, int fit_degree) {
    ExtendedFlow f(params, s.t, s.eta_x, eta_xt(s, params), fit_radius, fit_degree);
    f.set_state(s);
    return f;
}

std::array<double, 2> G(double x, double t, const ExtendedFlow& flow) {
    const int n = flow.params().n;
    const double a = flow.params().alpha();
    const auto v = flow.values(x, t, 2 * n - 1);
    return {v[2 * n - 1] / factorial(2 * n), -2.0 / (1.0 + a) * v[0]};
}

std::array<double, 4> DG(double x, double t, const ExtendedFlow& flow) {
    const int n = flow.params().n;
    const double a = flow.params().alpha();
    std::vector<double> v, r;
    flow.values_and_rates(x, t, 2 * n, v, r);
    const double f = factorial(2 * n);
    return {v[2 * n] / f, r[2 * n - 1] / f, -2.0 / (1.0 + a) * v[1], -2.0 / (1.0 + a) * r[0]};
}

NewtonResult newton_G(const ExtendedFlow& flow, const NewtonOptions& opt) {
    const Params& p = flow.params();
    const double a = p.alpha();
    const double x0 = 0.0, t0 = 2.0 / (1.0 + a);
    const double R = 1.0 / (3.0 * (1.0 + a) * p.C0);
    auto inside = [&](double x, double t) { return std::hypot(x - x0, t - t0) < R; };
    auto norm = [](const std::array<double, 2>& g) { return std::max(std::abs(g[0]), std::abs(g[1])); };

    NewtonResult res;
    res.ball_radius = R;
    double x = x0, t = t0;
    auto g = G(x, t, flow);
    double gn = norm(g);
    res.history.push_back({0, x, t, g[0], g[1], 1.0});
    for (int it = 1; it <= opt.max_iter; ++it) {
        if (gn <= opt.tol) {
            res.x = x;
            res.t = t;
            res.iterations = it - 1;
            res.residual = gn;
            return res;
        }
        const auto J = DG(x, t, flow);
        const double det = J[0] * J[3] - J[1] * J[2];
        if (!(std::abs(det) > 0.0) || !std::isfinite(det))
            throw Error(Errc::NewtonStalled, "singular Jacobian of G at iteration " + std::to_string(it));
        const double dx = -(J[3] * g[0] - J[1] * g[1]) / det;
        const double dt = -(-J[2] * g[0] + J[0] * g[1]) / det;
        double lam = 1.0;
        bool accepted = false, escaped = false;
        while (lam >= opt.min_damping) {
            const double xn = x + lam * dx, tn = t + lam * dt;
            escaped = !inside(xn, tn);
            if (!escaped) {
                const auto gt = G(xn, tn, flow);
                const double gtn = norm(gt);
                if (gtn < gn) {
                    x = xn;
                    t = tn;
                    g = gt;
                    gn = gtn;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!accepted) {
            if (escaped)
                throw Error(Errc::NewtonEscapedBall, "iterate left the ball of radius " + sci(R));
            throw Error(Errc::NewtonStalled, "no decrease of |G| = " + sci(gn));
        }
        res.history.push_back({it, x, t, g[0], g[1], lam});
    }
    if (gn > opt.tol)
        throw Error(Errc::NewtonStalled, "|G| = " + sci(gn) + " after " + std::to_string(opt.max_iter) +
                                             " iterations");
    res.x = x;
    res.t = t;
    res.iterations = static_cast<int>(res.history.size()) - 1;
    res.residual = gn;
    return res;
}

namespace {

// Derivatives of eta_x~(., t) and eta_xt~ at x from a fit window clipped to the core, so that
// it never straddles the bump transition.
void core_values(const ExtendedFlow& flow, const Field& at_t, double x, int order, std::vector<double>& v,
                 std::vector<double>& r) {
    const double rc = 1.0 / flow.params().C0;
    const double h = flow.fit_radius();
    const LocalTaylor fit(flow.N(), x, std::min(h, x + rc), std::min(h, rc - x), std::max(flow.fit_degree(), order));
    v = fit.derivatives(at_t, order);
    r = fit.derivatives(flow.eta_xt_grid(), order);
}

} // namespace

std::array<double, 2> first_zero(const ExtendedFlow& flow) {
    const Field& e = flow.eta_x_grid();
    const Field& r = flow.eta_xt_grid();
    const int N = flow.N();
    const Grid g(N);
    int best = -1;
    double tb = INFINITY;
    for (int i = 0; i < N; ++i) {
        if (!(r[i] < 0)) continue;
        const double t = flow.T_stop() - e[i] / r[i];
        if (t < tb) {
            tb = t;
            best = i;
        }
    }
    if (best < 0) throw Error(Errc::NoBlowup, "eta_xt is nowhere negative");
    auto zero_time = [&](double x) {
        const double rr = flow.rate(x);
        return rr < 0 ? flow.T_stop() - flow.value(x, flow.T_stop()) / rr : INFINITY;
    };
    const double x0 = g.x(best);
    const auto [x, t] =
        boost::math::tools::brent_find_minima(zero_time, x0 - g.dx(), x0 + g.dx(), std::numeric_limits<double>::digits);
    return {wrap_torus(x), std::min(t, tb)};
}

double core_sup(const ExtendedFlow& flow, double t, int order, int samples) {
    const double rc = 1.0 / flow.params().C0;
    double m = 0.0;
    std::vector<double> v, r;
    const Field at_t = flow.grid_values(t);
    for (int i = 0; i < samples; ++i) {
        core_values(flow, at_t, -rc + 2.0 * rc * i / (samples - 1), order, v, r);
        m = std::max(m, std::abs(v[order]));
    }
    return m;
}

int flatness_order(const ExtendedFlow& flow, double x, double t, double rel_tol, FlatnessDiagnostics* diag) {
    const int n = flow.params().n;
    const int top = 2 * n;
    FlatnessDiagnostics d;
    d.scale = core_sup(flow, t, top);
    d.derivatives = flow.values(x, t, top);
    d.thresholds.assign(top + 1, 0.0);
    for (int i = 1; i <= top; ++i)
        d.thresholds[i] = rel_tol * factorial(i) * std::pow(d.scale, static_cast<double>(i) / top);
    int first = 0;
    for (int i = 1; i <= top; ++i)
        if (std::abs(d.derivatives[i]) > d.thresholds[i]) {
            first = i;
            break;
        }
    if (first > 0 && first % 2 == 0 && d.derivatives[first] > 0) d.order = first;
    if (diag) *diag = d;
    if (d.order == 0) {
        const std::string why = first == 0 ? "no derivative up to order " + std::to_string(top) + " is above threshold"
                                           : "first non-vanishing derivative has order " + std::to_string(first) +
                                                 " and value " + sci(d.derivatives[first]);
        throw Error(Errc::FlatnessUndetermined, why);
    }
    return d.order;
}

BlowupReport analyze(const ExtendedFlow& flow, const NewtonOptions& opt, double flatness_rel_tol) {
    const Params& p = flow.params();
    const int n = p.n;
    const double a = p.alpha();
    BlowupReport r;
    r.params = p;
    r.N = flow.N();
    r.T_stop = flow.T_stop();
    r.newton = newton_G(flow, opt);
    r.x_star = r.newton.x;
    r.T_star = r.newton.t;
    r.flatness_rel_tol = flatness_rel_tol;

    FlatnessDiagnostics fd;
    try {
        r.flatness_order = flatness_order(flow, r.x_star, r.T_star, flatness_rel_tol, &fd);
    } catch (const Error& e) {
        if (e.code() != Errc::FlatnessUndetermined) throw;
        r.flatness_order = 0;
    }
    r.flatness_scale = fd.scale;
    r.flatness_thresholds = fd.thresholds;

    r.derivatives = flow.values(r.x_star, r.T_star, 2 * n + 1);
    r.derivatives_t = flow.rates(r.x_star, 2 * n + 1);
    r.a_hi = r.derivatives[2 * n] / factorial(2 * n + 1);
    r.a_lo = r.derivatives[2 * n + 1] / factorial(2 * n + 2);
    r.a_lo_sup = core_sup(flow, r.T_star, 2 * n + 1) / factorial(2 * n + 2);
    for (int i = 1; i <= 2 * n - 2; ++i) r.f.push_back(r.derivatives[i]);

    // Checks on the core and off it.
    const double rc = 1.0 / p.C0;
    double emin = 1e300, emax = -1e300, dmin = 1e300;
    std::vector<double> cv, cr;
    const Field at_T = flow.grid_values(r.T_star);
    for (int i = 0; i < 257; ++i) {
        core_values(flow, at_T, -rc + 2.0 * rc * i / 256, 2 * n, cv, cr);
        emin = std::min(emin, cr[0]);
        emax = std::max(emax, cr[0]);
        dmin = std::min(dmin, cv[2 * n]);
    }
    r.eta_xt_core_min = emin;
    r.eta_xt_core_max = emax;
    r.eta_xt_bounds_ok = emin >= -2.0 / 3.0 * (1 + a) && emax <= -(1 + a) / 3.0;
    r.core_2n_ok = dmin >= factorial(2 * n) / 2;
    r.a_hi_ok = r.a_hi > 1.0 / (2.0 * (2 * n + 1));

    const Field early = flow.grid_values(std::min(r.T_star, r.T_stop));
    const MinLoc ml = min_with_location(early);
    const Grid grid(flow.N());
    r.min_location_ok = torus_distance(grid.x(ml.index), r.x_star) <= 2.0 * grid.dx();
    const double floor = 0.5 * std::pow(p.C0, -2.0 * n);
    r.outer_floor_ok = true;
    for (int i = 0; i < grid.N; ++i)
        if (std::abs(grid.x(i)) >= rc && early[i] < floor) r.outer_floor_ok = false;
    return r;
}

nlohmann::ordered_json to_json(const BlowupReport& r) {
    nlohmann::ordered_json j;
    j["params"] = params_to_json(r.params);
    j["N"] = r.N;
    j["T_stop"] = r.T_stop;
    j["x_star"] = r.x_star;
    j["T_star"] = r.T_star;
    j["flatness_order"] = r.flatness_order;
    j["flatness_rel_tol"] = r.flatness_rel_tol;
    j["flatness_scale"] = r.flatness_scale;
    j["flatness_thresholds"] = r.flatness_thresholds;
    j["derivatives"] = r.derivatives;
    j["derivatives_t"] = r.derivatives_t;
    j["a_hi"] = r.a_hi;
    j["a_lo"] = r.a_lo;
    j["a_lo_sup"] = r.a_lo_sup;
    j["f"] = r.f;
    nlohmann::ordered_json nw;
    nw["iterations"] = r.newton.iterations;
    nw["residual"] = r.newton.residual;
    nw["ball_radius"] = r.newton.ball_radius;
    auto& h = nw["history"] = nlohmann::ordered_json::array();
    for (const auto& it : r.newton.history)
        h.push_back({{"iter", it.iter}, {"x", it.x}, {"t", it.t}, {"g1", it.g1}, {"g2", it.g2}, {"damping", it.damping}});
    j["newton"] = nw;
    j["checks"] = {{"eta_xt_core_min", r.eta_xt_core_min}, {"eta_xt_core_max", r.eta_xt_core_max},
                   {"eta_xt_bounds_ok", r.eta_xt_bounds_ok}, {"min_location_ok", r.min_location_ok},
                   {"outer_floor_ok", r.outer_floor_ok},     {"core_2n_ok", r.core_2n_ok},
                   {"a_hi_ok", r.a_hi_ok}};
    return j;
}

BlowupReport blowup_report_from_json(const nlohmann::ordered_json& j) {
    try {
        BlowupReport r;
        r.params = params_from_json(j.at("params"));
        r.N = j.at("N").get<int>();
        r.T_stop = j.at("T_stop").get<double>();
        r.x_star = j.at("x_star").get<double>();
        r.T_star = j.at("T_star").get<double>();
        r.flatness_order = j.at("flatness_order").get<int>();
        r.flatness_rel_tol = j.at("flatness_rel_tol").get<double>();
        r.flatness_scale = j.at("flatness_scale").get<double>();
        r.flatness_thresholds = j.at("flatness_thresholds").get<std::vector<double>>();
        r.derivatives = j.at("derivatives").get<std::vector<double>>();
        r.derivatives_t = j.at("derivatives_t").get<std::vector<double>>();
        r.a_hi = j.at("a_hi").get<double>();
        r.a_lo = j.at("a_lo").get<double>();
        r.a_lo_sup = j.at("a_lo_sup").get<double>();
        r.f = j.at("f").get<std::vector<double>>();
        const auto& nw = j.at("newton");
        r.newton.iterations = nw.at("iterations").get<int>();
        r.newton.residual = nw.at("residual").get<double>();
        r.newton.ball_radius = nw.at("ball_radius").get<double>();
        for (const auto& it : nw.at("history"))
            r.newton.history.push_back({it.at("iter").get<int>(), it.at("x").get<double>(), it.at("t").get<double>(),
                                        it.at("g1").get<double>(), it.at("g2").get<double>(),
                                        it.at("damping").get<double>()});
        r.newton.x = r.x_star;
        r.newton.t = r.T_star;
        const auto& c = j.at("checks");
        r.eta_xt_core_min = c.at("eta_xt_core_min").get<double>();
        r.eta_xt_core_max = c.at("eta_xt_core_max").get<double>();
        r.eta_xt_bounds_ok = c.at("eta_xt_bounds_ok").get<bool>();
        r.min_location_ok = c.at("min_location_ok").get<bool>();
        r.outer_floor_ok = c.at("outer_floor_ok").get<bool>();
        r.core_2n_ok = c.at("core_2n_ok").get<bool>();
        r.a_hi_ok = c.at("a_hi_ok").get<bool>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadArtifact, std::string("blowup report: ") + e.what());
    }
}

} // namespace preshock
