#include "preshock/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace preshock {

namespace {

bool all_zero(const Field& f) {
    for (double v : f)
        if (v != 0.0) return false;
    return true;
}

void dx_into(const Field& f, Field& out, const SolverConfig& cfg) {
    if (all_zero(f)) {
        out.assign(f.size(), 0.0);
        return;
    }
    if (cfg.method == DerivMethod::central_fd) {
        out = periodic_derivative(f, 1, cfg.method);
        return;
    }
    spectral_dx_into(f, out, cfg.dealias);
}

struct Scratch {
    Field Kx, Zx, dKx, dZx;
};

void check_floor(const LagrangianState& s, const SolverConfig& cfg) {
    for (int i = 0; i < s.N(); ++i)
        if (!(s.eta_x[i] >= cfg.eta_floor))
            throw Error(Errc::NearBlowup, "eta_x = " + std::to_string(s.eta_x[i]) + " below the floor at index " +
                                              std::to_string(i) + ", t = " + std::to_string(s.t));
}

void axpy_into(const LagrangianState& y, double a, const LagrangianState& k, LagrangianState& r) {
    r.t = y.t + a;
    for (auto m : LagrangianState::members) {
        const Field& yf = y.*m;
        const Field& kf = k.*m;
        Field& rf = r.*m;
        rf.resize(yf.size());
        for (std::size_t i = 0; i < yf.size(); ++i) rf[i] = yf[i] + a * kf[i];
    }
}

LagrangianState axpy(const LagrangianState& y, double a, const LagrangianState& k) {
    LagrangianState r;
    axpy_into(y, a, k, r);
    return r;
}

void rhs_into(const LagrangianState& s, LagrangianState& d, const Params& params, const SolverConfig& cfg, Scratch& sc);
void tangent_rhs_into(const LagrangianState& s, const LagrangianState& ds, const LagrangianState& v,
                      LagrangianState& d, const Params& params, const SolverConfig& cfg, Scratch& sc);

// Base plus any number of co-integrated variations, with preallocated stage storage.
class Integrator {
    const Params& params_;
    const SolverConfig& cfg_;

public:
    Integrator(const Params& params, const SolverConfig& cfg, std::vector<LagrangianState> y0)
        : params_(params), cfg_(cfg), y(std::move(y0)) {
        const int N = y[0].N();
        for (std::size_t j = 0; j < y.size(); ++j) {
            comp.push_back(LagrangianState::zeros(N));
            tmp.push_back(LagrangianState::zeros(N));
            for (auto& kk : k) kk.push_back(LagrangianState::zeros(N));
        }
        tcomp_.assign(y.size(), 0.0);
    }

    void eval(const std::vector<LagrangianState>& in, std::vector<LagrangianState>& out) {
        rhs_into(in[0], out[0], params_, cfg_, sc_);
        for (std::size_t j = 1; j < in.size(); ++j) tangent_rhs_into(in[0], out[0], in[j], out[j], params_, cfg_, sc_);
    }

    // k[0] must hold the derivative at y.
    void stages(double dt) {
        shift(0.5 * dt, k[0]);
        eval(tmp, k[1]);
        shift(0.5 * dt, k[1]);
        eval(tmp, k[2]);
        shift(dt, k[2]);
        eval(tmp, k[3]);
    }

    double trial_min(double dt) {
        Field& e = trial_;
        e = y[0].eta_x;
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] += dt / 6.0 * (k[0][0].eta_x[i] + 2.0 * k[1][0].eta_x[i] + 2.0 * k[2][0].eta_x[i] + k[3][0].eta_x[i]);
        return min_with_location(e).value;
    }

    void commit(double dt) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            for (auto m : LagrangianState::members) {
                Field& yy = y[j].*m;
                Field& c = comp[j].*m;
                const Field &a = k[0][j].*m, &b = k[1][j].*m, &cc = k[2][j].*m, &d = k[3][j].*m;
                for (std::size_t i = 0; i < yy.size(); ++i) {
                    const double inc = dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * cc[i] + d[i]);
                    const double yk = inc - c[i];
                    const double t = yy[i] + yk;
                    c[i] = (t - yy[i]) - yk;
                    yy[i] = t;
                }
            }
            const double yk = dt - tcomp_[j];
            const double t = y[j].t + yk;
            tcomp_[j] = (t - y[j].t) - yk;
            y[j].t = t;
        }
    }

    std::vector<LagrangianState> y, comp, tmp;
    std::array<std::vector<LagrangianState>, 4> k;

private:
    void shift(double a, const std::vector<LagrangianState>& kk) {
        for (std::size_t j = 0; j < y.size(); ++j) axpy_into(y[j], a, kk[j], tmp[j]);
    }

    Scratch sc_;
    Field trial_;
    std::vector<double> tcomp_;
};

double choose_dt(const LagrangianState& s, const LagrangianState& ds, const Params& params, const SolverConfig& cfg) {
    double dt = cfg.dt_max;
    for (int i = 0; i < s.N(); ++i) {
        const double r = std::abs(ds.eta_x[i]);
        if (r > 0) dt = std::min(dt, cfg.safety * s.eta_x[i] / r);
    }
    if (!all_zero(s.Zring) || !all_zero(s.Kring)) {
        const double a = params.alpha();
        const double h = 1.0 / s.N();
        for (int i = 0; i < s.N(); ++i) dt = std::min(dt, cfg.cfl * h * s.eta_x[i] / (2.0 * a * s.Sigma[i]));
    }
    return dt;
}

std::string locate(const char* field, const Field& f, bool want_max) {
    int idx = 0;
    for (int i = 1; i < static_cast<int>(f.size()); ++i)
        if (want_max ? f[i] > f[idx] : f[i] < f[idx]) idx = i;
    std::ostringstream os;
    os << field << " at x = " << (-0.5 + static_cast<double>(idx) / f.size()) << " (value " << f[idx] << ")";
    return os.str();
}

void breach(const LagrangianState& s, const MonitorReport& m) {
    std::string where;
    if (!m.sigma_ok) where = locate("Sigma", s.Sigma, m.Sigma_max > 3.0);
    else if (!m.eta_xW_ok) where = locate("eta_xW", s.eta_xW, m.eta_xW_max > 4.0 / 3.0);
    else if (!m.eta_x_ok) where = locate("eta_x", s.eta_x, true);
    else where = "eta_xW <= -1/2 + 4 eta_x violated by " + std::to_string(m.W_margin);
    throw Error(Errc::MonitorBreach, where + ", t = " + std::to_string(s.t));
}

} // namespace

LagrangianState LagrangianState::zeros(int N, double t) {
    LagrangianState s;
    s.t = t;
    for (auto m : members) (s.*m).assign(N, 0.0);
    return s;
}

LagrangianState initialize(const Field& w0, const Field& z0, const Field& k0, const Params& params) {
    const int N = static_cast<int>(w0.size());
    check_finite(w0, "w0");
    check_finite(z0, "z0");
    check_finite(k0, "k0");
    // Derivatives from the noise-trimmed spectrum keep roundoff out of the top modes.
    const Field w0p = TrigInterpolant(w0, true).on_grid(1);
    const Field z0p = all_zero(z0) ? Field(N, 0.0) : TrigInterpolant(z0, true).on_grid(1);
    const Field k0p = all_zero(k0) ? Field(N, 0.0) : TrigInterpolant(k0, true).on_grid(1);
    const double c = 1.0 / (2.0 * params.gamma);
    Grid g(N);
    LagrangianState s = LagrangianState::zeros(N, 0.0);
    for (int i = 0; i < N; ++i) {
        const double sigma = 0.5 * (w0[i] - z0[i]);
        if (!(sigma > 0)) throw Error(Errc::VacuumState, "sigma0 <= 0 at index " + std::to_string(i));
        s.Sigma[i] = sigma;
        s.eta_x[i] = 1.0;
        s.eta_xW[i] = w0p[i] - c * sigma * k0p[i];
        s.Zring[i] = z0p[i] + c * sigma * k0p[i];
        s.Kring[i] = k0p[i];
        s.eta[i] = g.x(i);
        s.Wcomp[i] = w0[i];
        s.Zcomp[i] = z0[i];
        s.Kcomp[i] = k0[i];
    }
    return s;
}

LagrangianState initialize(const InitialData& data) { return initialize(data.w0, data.z0, data.k0, data.params); }

Field eta_xt(const LagrangianState& s, const Params& params) {
    const double a = params.alpha(), g = params.gamma;
    Field r(s.N());
    for (int i = 0; i < s.N(); ++i)
        r[i] = 0.5 * (1 + a) * s.eta_xW[i] + 0.5 * (1 - a) * s.eta_x[i] * s.Zring[i] +
               a / (2 * g) * s.eta_x[i] * s.Sigma[i] * s.Kring[i];
    return r;
}

namespace {

void rhs_into(const LagrangianState& s, LagrangianState& d, const Params& params, const SolverConfig& cfg, Scratch& sc) {
    check_floor(s, cfg);
    const double a = params.alpha(), g = params.gamma;
    const double q2 = a / (2 * g), q4 = a / (4 * g), hp = 0.5 * (1 + a), hm = 0.5 * (1 - a);
    const int N = s.N();
    dx_into(s.Kring, sc.Kx, cfg);
    dx_into(s.Zring, sc.Zx, cfg);
    const double* __restrict Kx = sc.Kx.data();
    const double* __restrict Zx = sc.Zx.data();
    const double* __restrict sS = s.Sigma.data();
    const double* __restrict sE = s.eta_x.data();
    const double* __restrict sP = s.eta_xW.data();
    const double* __restrict sZ = s.Zring.data();
    const double* __restrict sK = s.Kring.data();
    const double* __restrict sW = s.Wcomp.data();
    const double* __restrict sZc = s.Zcomp.data();
    double* __restrict dS = d.Sigma.data();
    double* __restrict dE = d.eta_x.data();
    double* __restrict dP = d.eta_xW.data();
    double* __restrict dZ = d.Zring.data();
    double* __restrict dK = d.Kring.data();
    double* __restrict de = d.eta.data();
    double* __restrict dW = d.Wcomp.data();
    double* __restrict dZc = d.Zcomp.data();
    double* __restrict dKc = d.Kcomp.data();
    for (int i = 0; i < N; ++i) {
        const double S = sS[i], E = sE[i], P = sP[i], Z = sZ[i], K = sK[i];
        const double iE = 1.0 / E;
        const double SSK = q2 * S * S * K;
        dS[i] = -a * S * Z + SSK;
        dE[i] = hp * P + hm * E * Z + q2 * E * S * K;
        dP[i] = q4 * S * K * (P + E * Z);
        dK[i] = (a * S * Kx[i] - 0.5 * K * P - 0.5 * E * K * Z) * iE;
        dZ[i] = (2 * a * S * Zx[i] - hm * P * Z - q4 * S * K * P - hp * E * Z * Z + q4 * E * S * K * Z) * iE;
        de[i] = hp * sW[i] + hm * sZc[i];
        dW[i] = SSK;
        dZc[i] = 2 * a * S * Z - SSK;
        dKc[i] = a * S * K;
    }
}

} // namespace

LagrangianState rhs(const LagrangianState& s, const Params& params, const SolverConfig& cfg) {
    LagrangianState d = LagrangianState::zeros(s.N(), 1.0);
    Scratch sc;
    rhs_into(s, d, params, cfg, sc);
    return d;
}

namespace {

void tangent_rhs_into(const LagrangianState& s, const LagrangianState& ds, const LagrangianState& v,
                      LagrangianState& d, const Params& params, const SolverConfig& cfg, Scratch& sc) {
    const double a = params.alpha(), g = params.gamma;
    const int N = s.N();
    // sc.Kx and sc.Zx still hold the base derivatives from the preceding rhs_into call.
    dx_into(v.Kring, sc.dKx, cfg);
    dx_into(v.Zring, sc.dZx, cfg);
    const Field &Kx = sc.Kx, &Zx = sc.Zx, &dKx = sc.dKx, &dZx = sc.dZx;
    const double q2 = a / (2 * g), q4 = a / (4 * g);
    for (int i = 0; i < N; ++i) {
        const double S = s.Sigma[i], E = s.eta_x[i], P = s.eta_xW[i], Z = s.Zring[i], K = s.Kring[i];
        const double dS = v.Sigma[i], dE = v.eta_x[i], dP = v.eta_xW[i], dZ = v.Zring[i], dK = v.Kring[i];
        d.Sigma[i] = -a * (dS * Z + S * dZ) + q2 * (2 * S * dS * K + S * S * dK);
        d.eta_x[i] = 0.5 * (1 + a) * dP + 0.5 * (1 - a) * (dE * Z + E * dZ) + q2 * (dE * S * K + E * dS * K + E * S * dK);
        d.eta_xW[i] = q4 * ((dS * K + S * dK) * (P + E * Z) + S * K * (dP + dE * Z + E * dZ));
        const double dNK = a * (dS * Kx[i] + S * dKx[i]) - 0.5 * (dK * P + K * dP) -
                           0.5 * (dE * K * Z + E * dK * Z + E * K * dZ);
        d.Kring[i] = (dNK - ds.Kring[i] * dE) / E;
        const double dNZ = 2 * a * (dS * Zx[i] + S * dZx[i]) - 0.5 * (1 - a) * (dP * Z + P * dZ) -
                           q4 * (dS * K * P + S * dK * P + S * K * dP) - 0.5 * (1 + a) * (dE * Z * Z + 2 * E * Z * dZ) +
                           q4 * (dE * S * K * Z + E * dS * K * Z + E * S * dK * Z + E * S * K * dZ);
        d.Zring[i] = (dNZ - ds.Zring[i] * dE) / E;
        d.eta[i] = 0.5 * (1 + a) * v.Wcomp[i] + 0.5 * (1 - a) * v.Zcomp[i];
        d.Wcomp[i] = q2 * (2 * S * dS * K + S * S * dK);
        d.Zcomp[i] = 2 * a * (dS * Z + S * dZ) - q2 * (2 * S * dS * K + S * S * dK);
        d.Kcomp[i] = a * (dS * K + S * dK);
    }
}

} // namespace

LagrangianState tangent_rhs(const LagrangianState& s, const LagrangianState& ds, const LagrangianState& v,
                            const Params& params, const SolverConfig& cfg) {
    LagrangianState d = LagrangianState::zeros(s.N(), 1.0);
    Scratch sc;
    dx_into(s.Kring, sc.Kx, cfg);
    dx_into(s.Zring, sc.Zx, cfg);
    tangent_rhs_into(s, ds, v, d, params, cfg, sc);
    return d;
}

LagrangianState tangent_initialize(const Field& dir, const Field& k0, const Params& params) {
    const int N = static_cast<int>(dir.size());
    const Field dp = all_zero(dir) ? Field(N, 0.0) : TrigInterpolant(dir, true).on_grid(1);
    const Field k0p = all_zero(k0) ? Field(N, 0.0) : TrigInterpolant(k0, true).on_grid(1);
    const double g = params.gamma;
    LagrangianState v = LagrangianState::zeros(N, 0.0);
    for (int i = 0; i < N; ++i) {
        v.Sigma[i] = 0.5 * dir[i];
        v.eta_xW[i] = dp[i] - dir[i] * k0p[i] / (4 * g);
        v.Zring[i] = dir[i] * k0p[i] / (4 * g);
        v.Wcomp[i] = dir[i];
    }
    return v;
}

LagrangianState step(const LagrangianState& s, double dt, const Params& params, const SolverConfig& cfg) {
    const LagrangianState k1 = rhs(s, params, cfg);
    const LagrangianState k2 = rhs(axpy(s, 0.5 * dt, k1), params, cfg);
    const LagrangianState k3 = rhs(axpy(s, 0.5 * dt, k2), params, cfg);
    const LagrangianState k4 = rhs(axpy(s, dt, k3), params, cfg);
    LagrangianState r = s;
    r.t = s.t + dt;
    for (auto m : LagrangianState::members) {
        Field& f = r.*m;
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] += dt / 6.0 * ((k1.*m)[i] + 2.0 * (k2.*m)[i] + 2.0 * (k3.*m)[i] + (k4.*m)[i]);
    }
    return r;
}

MonitorReport monitor(const LagrangianState& s, const Params& params) {
    MonitorReport m;
    m.t = s.t;
    auto [smin, smax] = std::minmax_element(s.Sigma.begin(), s.Sigma.end());
    auto [emin, emax] = std::minmax_element(s.eta_x.begin(), s.eta_x.end());
    auto [pmin, pmax] = std::minmax_element(s.eta_xW.begin(), s.eta_xW.end());
    m.Sigma_min = *smin;
    m.Sigma_max = *smax;
    m.eta_x_min = *emin;
    m.eta_x_max = *emax;
    m.eta_xW_min = *pmin;
    m.eta_xW_max = *pmax;
    m.W_margin = -INFINITY;
    for (int i = 0; i < s.N(); ++i) m.W_margin = std::max(m.W_margin, s.eta_xW[i] - (-0.5 + 4.0 * s.eta_x[i]));
    m.max_abs_K = max_abs(s.Kring);
    m.max_abs_Z = max_abs(s.Zring);
    const double a = params.alpha();
    m.Bk = std::pow(6.0, 1.0 / a);
    m.Bz = std::pow(6.0, 2.0 / std::min(1.0, a)) * (2.0 + 1.0 / params.gamma) * std::exp(21.0);
    m.K_over_eps = m.max_abs_K / params.epsilon;
    m.Z_over_eps = m.max_abs_Z / params.epsilon;
    m.K_ratio = m.K_over_eps / m.Bk;
    m.Z_ratio = m.Z_over_eps / m.Bz;
    m.sigma_ok = m.Sigma_min >= 1.0 / 3.0 && m.Sigma_max <= 3.0;
    m.eta_xW_ok = std::max(std::abs(m.eta_xW_min), std::abs(m.eta_xW_max)) <= 4.0 / 3.0;
    m.eta_x_ok = m.eta_x_max <= 3.0;
    m.W_ok = m.W_margin <= 0.0;
    return m;
}

CompatResidual compat_residual(const LagrangianState& s, const Params& params) {
    const Field Sx = periodic_derivative(s.Sigma, 1);
    const Field Wx = periodic_derivative(s.Wcomp, 1);
    const double c = 1.0 / (2.0 * params.gamma);
    CompatResidual r;
    for (int i = 0; i < s.N(); ++i) {
        const double E = s.eta_x[i];
        r.sigma = std::max(r.sigma, std::abs(Sx[i] - (0.5 * s.eta_xW[i] - 0.5 * E * s.Zring[i] +
                                                      c * E * s.Sigma[i] * s.Kring[i])));
        r.w = std::max(r.w, std::abs(Wx[i] - (s.eta_xW[i] + c * E * s.Sigma[i] * s.Kring[i])));
    }
    return r;
}

RunResult run_to_near_blowup(const LagrangianState& s0, const Params& params, const SolverConfig& cfg,
                             const RunOptions& opt) {
    if (!(cfg.delta_stop > cfg.eta_floor)) throw Error(Errc::BadConfig, "delta_stop must exceed eta_floor");
    std::vector<LagrangianState> y0{s0};
    for (const Field& d : opt.directions) {
        if (!opt.k0) throw Error(Errc::BadConfig, "sensitivity directions need k0");
        y0.push_back(tangent_initialize(d, *opt.k0, params));
        y0.back().t = s0.t;
    }
    Integrator in(params, cfg, std::move(y0));

    RunResult res;
    auto record = [&](const LagrangianState& s, bool force) {
        MonitorReport m = monitor(s, params);
        if (!m.structural_ok()) {
            res.monitors_ok = false;
            if (cfg.fail_fast_monitors) breach(s, m);
        }
        if (force || res.steps % std::max(1, cfg.log_stride) == 0) {
            const CompatResidual c = compat_residual(s, params);
            res.max_compat = std::max(res.max_compat, c.max());
            const MinLoc ml = min_with_location(s.eta_x);
            res.log.push_back({s.t, ml.value, ml.x, m.max_abs_K, m.max_abs_Z, c.max(), m});
        }
    };
    record(in.y[0], true);

    while (true) {
        if (res.steps >= cfg.max_steps) throw Error(Errc::NoBlowup, "step limit reached before the stop criterion");
        for (double f : in.y[0].eta_x)
            if (!std::isfinite(f)) throw Error(Errc::NonFiniteField, "eta_x became non-finite");
        in.eval(in.y, in.k[0]);
        double dt = choose_dt(in.y[0], in.k[0][0], params, cfg);
        bool last = false;
        if (opt.t_end && in.y[0].t + dt >= *opt.t_end) {
            dt = *opt.t_end - in.y[0].t;
            last = true;
        }
        if (dt <= 0) break;
        in.stages(dt);
        if (in.trial_min(dt) <= cfg.delta_stop) {
            // Land on delta_stop: the stop time then depends smoothly on the data.
            const double m0 = min_with_location(in.y[0].eta_x).value;
            auto gfun = [&](double tau) {
                if (tau == 0.0) return m0 - cfg.delta_stop;
                in.stages(tau);
                return in.trial_min(tau) - cfg.delta_stop;
            };
            dt = bracketed_root(gfun, 0.0, dt, 1e-14, 100);
            in.stages(dt);
            last = true;
            res.reached_stop = true;
        }
        in.commit(dt);
        if (last && opt.t_end && !res.reached_stop)
            for (auto& st : in.y) st.t = *opt.t_end;
        ++res.steps;
        record(in.y[0], last);
        if (last) break;
    }
    res.state = in.y[0];
    for (std::size_t j = 1; j < in.y.size(); ++j) {
        in.y[j].t = in.y[0].t;
        res.tangents.push_back(in.y[j]);
    }
    return res;
}

RunResult sensitivity_run(const InitialData& data, const Field& direction, const SolverConfig& cfg,
                          std::optional<double> t_end) {
    RunOptions opt;
    opt.t_end = t_end;
    opt.directions = {direction};
    opt.k0 = &data.k0;
    return run_to_near_blowup(initialize(data), data.params, cfg, opt);
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& log) {
    os << "t,min_eta_x,argmin_x,max_abs_K,max_abs_Z,compat_residual\n";
    os << std::setprecision(17);
    for (const auto& r : log)
        os << r.t << ',' << r.min_eta_x << ',' << r.argmin_x << ',' << r.max_abs_K << ',' << r.max_abs_Z << ','
           << r.compat_residual << '\n';
}

} // namespace preshock
