#include "preshock/manifold.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace preshock {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double sup(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> solve(const Matrix& J, const std::vector<double>& f) {
    const int m = static_cast<int>(f.size());
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        b(i) = f[i];
        for (int j = 0; j < m; ++j) A(i, j) = J[i][j];
    }
    const Eigen::VectorXd x = A.fullPivLu().solve(b);
    return {x.data(), x.data() + m};
}

Matrix scaled_identity(int m, double alpha, double T) {
    Matrix J(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) J[i][i] = 0.5 * (1 + alpha) * T;
    return J;
}

// D_lambda f_n from the co-integrated variations, with the implicit dependence of (x*, T*)
// on lambda through G = 0. The dependence of the anchor time T_stop on lambda is neglected.
Matrix sensitivity_jacobian(const RunResult& run, const ExtendedFlow& flow, const BlowupReport& rep,
                            const Params& p, const SolverConfig& cfg) {
    const int n = p.n;
    const int m = 2 * n - 2;
    const double a = p.alpha();
    const double x = rep.x_star, T = rep.T_star;
    std::vector<double> v, r;
    flow.values_and_rates(x, T, 2 * n, v, r);
    const auto J = DG(x, T, flow);
    const double det = J[0] * J[3] - J[1] * J[2];
    const LagrangianState base_rhs = rhs(run.state, p, cfg);
    Matrix D(m, std::vector<double>(m, 0.0));
    for (int j = 0; j < m; ++j) {
        const LagrangianState& var = run.tangents[j];
        const LagrangianState dv = tangent_rhs(run.state, base_rhs, var, p, cfg);
        const ExtendedFlow dflow(p, run.state.t, var.eta_x, dv.eta_x, flow.fit_radius(), flow.fit_degree());
        const auto dd = dflow.values(x, T, 2 * n - 1);
        const double g1 = dd[2 * n - 1] / factorial(2 * n), g2 = -2.0 / (1 + a) * dd[0];
        const double dx = -(J[3] * g1 - J[1] * g2) / det;
        const double dT = -(-J[2] * g1 + J[0] * g2) / det;
        for (int i = 1; i <= m; ++i) D[i - 1][j] = dd[i] + v[i + 1] * dx + r[i] * dT;
    }
    return D;
}

} // namespace

std::string jacobian_mode_name(JacobianMode m) {
    switch (m) {
    case JacobianMode::scaled_identity: return "scaled_identity";
    case JacobianMode::finite_difference: return "finite_difference";
    case JacobianMode::sensitivity: return "sensitivity";
    }
    return "unknown";
}

JacobianMode parse_jacobian_mode(const std::string& s) {
    if (s == "scaled_identity") return JacobianMode::scaled_identity;
    if (s == "finite_difference") return JacobianMode::finite_difference;
    if (s == "sensitivity") return JacobianMode::sensitivity;
    throw Error(Errc::BadConfig, "unknown jacobian mode '" + s + "'");
}

double fd_step(double epsilon) { return std::max(1e-7, 1e-3 * epsilon); }

FEvaluation evaluate_f(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                       const std::vector<double>& lambda, const ManifoldOptions& opt, bool sensitivity,
                       const AssembleOptions& checks) {
    const Params& p = fam.params;
    FEvaluation ev;
    ev.data = assemble(fam, wtilde0, z0, k0, lambda, checks);
    RunOptions ro;
    if (sensitivity && fam.basis) {
        for (int j = 1; j <= fam.basis->size(); ++j) ro.directions.push_back(fam.basis->field(j));
        ro.k0 = &ev.data.k0;
    }
    ev.run = run_to_near_blowup(initialize(ev.data), p, opt.solver, ro);
    const ExtendedFlow flow = extend(ev.run.state, p);
    ev.report = analyze(flow, opt.newton, opt.flatness_rel_tol);
    ev.f = ev.report.f;
    if (sensitivity && fam.basis) ev.sensitivity = sensitivity_jacobian(ev.run, flow, ev.report, p, opt.solver);
    return ev;
}

std::vector<double> f_n(const InitialData& data, const SolverConfig& cfg, const NewtonOptions& newton) {
    if (data.params.n < 2) return {};
    const RunResult run = run_to_near_blowup(initialize(data), data.params, cfg);
    return analyze(extend(run.state, data.params), newton).f;
}

Matrix fd_jacobian(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                   const std::vector<double>& lambda, const ManifoldOptions& opt) {
    const int m = static_cast<int>(lambda.size());
    const double h = fd_step(fam.params.epsilon);
    AssembleOptions quiet;
    quiet.check_U = quiet.check_Lambda = false;
    Matrix J(m, std::vector<double>(m, 0.0));
    for (int j = 0; j < m; ++j) {
        auto lp = lambda, lm = lambda;
        lp[j] += h;
        lm[j] -= h;
        const auto fp = evaluate_f(fam, wtilde0, z0, k0, lp, opt, false, quiet).f;
        const auto fm = evaluate_f(fam, wtilde0, z0, k0, lm, opt, false, quiet).f;
        for (int i = 0; i < m; ++i) J[i][j] = (fp[i] - fm[i]) / (2 * h);
    }
    return J;
}

ManifoldPoint solve_lambda(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                           const ManifoldOptions& opt) {
    const Params& p = fam.params;
    const int n = p.n;
    const int m = std::max(0, 2 * n - 2);
    const double a = p.alpha();
    ManifoldPoint mp;
    mp.params = p;
    mp.N = fam.grid.N;
    mp.mode = opt.mode;

    AssembleOptions first;
    first.check_U = opt.check_admissible;
    first.U_radius = opt.U_radius > 0 ? opt.U_radius : p.epsilon * p.epsilon;
    if (!opt.check_admissible) first.check_A = first.check_B = first.check_X = first.check_Lambda = false;
    AssembleOptions later = first;
    later.check_U = false;

    if (m == 0) {
        const FEvaluation ev = evaluate_f(fam, wtilde0, z0, k0, {}, opt, false, first);
        mp.data = ev.data;
        mp.report = ev.report;
        mp.state = ev.run.state;
        mp.trajectory = ev.run.log;
        return mp;
    }

    std::vector<double> lambda = opt.lambda0.empty() ? std::vector<double>(m, 0.0) : opt.lambda0;
    if (static_cast<int>(lambda.size()) != m) throw Error(Errc::BadConfig, "lambda0 must have length 2n-2");
    auto in_box = [&](const std::vector<double>& l) {
        double s = 0.0;
        for (double v : l) s += std::abs(v);
        return fam.Ln() * s < 0.5 * p.epsilon;
    };

    std::optional<FEvaluation> best;
    std::vector<double> best_lambda;
    int polished = 0;
    bool converged = false;
    for (int it = 0; it <= opt.max_iter; ++it) {
        FEvaluation ev = evaluate_f(fam, wtilde0, z0, k0, lambda, opt, opt.mode == JacobianMode::sensitivity,
                                    it == 0 ? first : later);
        const double res = sup(ev.f);
        mp.residual_history.push_back(res);
        mp.lambda_history.push_back(lambda);
        const bool better = !best || res < sup(best->f);
        Matrix J;
        switch (opt.mode) {
        case JacobianMode::scaled_identity: J = scaled_identity(m, a, ev.report.T_star); break;
        case JacobianMode::finite_difference: J = fd_jacobian(fam, wtilde0, z0, k0, lambda, opt); break;
        case JacobianMode::sensitivity: J = *ev.sensitivity; break;
        }
        if (better) {
            best = std::move(ev);
            best_lambda = lambda;
            mp.jacobian = J;
            mp.iterations = it;
        }
        if (res <= opt.tol) converged = true;
        if (converged) {
            if (polished >= opt.polish_steps || !better) break;
            ++polished;
        }
        if (it == opt.max_iter) break;
        const auto step = solve(J, best->f);
        lambda = best_lambda;
        for (int i = 0; i < m; ++i) lambda[i] -= step[i];
        if (!in_box(lambda))
            throw Error(Errc::LeftParameterBox, "L_n sum |lambda_j| reached eps/2 at iteration " + std::to_string(it + 1));
    }
    if (!converged)
        throw Error(Errc::ManifoldNewtonStalled, "|f_n| = " + sci(sup(best->f)) + " after " +
                                                     std::to_string(opt.max_iter) + " iterations");

    mp.lambda_star = best_lambda;
    mp.residual = sup(best->f);
    mp.data = best->data;
    mp.report = best->report;
    mp.state = best->run.state;
    mp.trajectory = best->run.log;
    mp.inside_guaranteed_ball = !check_U(wtilde0, z0, k0, fam, p.epsilon * p.epsilon);

    if (opt.verify_jacobian) {
        mp.jacobian_fd = fd_jacobian(fam, wtilde0, z0, k0, best_lambda, opt);
        const double s = 2.0 / ((1 + a) * mp.report.T_star);
        double defect = 0.0;
        for (int i = 0; i < m; ++i) {
            double row = 0.0;
            for (int j = 0; j < m; ++j) row += std::abs(s * (*mp.jacobian_fd)[i][j] - (i == j ? 1.0 : 0.0));
            defect = std::max(defect, row);
        }
        mp.scaled_jacobian_defect = defect;
    }
    return mp;
}

nlohmann::ordered_json to_json(const ManifoldPoint& m) {
    nlohmann::ordered_json j;
    j["params"] = params_to_json(m.params);
    j["N"] = m.N;
    j["jacobian_mode"] = jacobian_mode_name(m.mode);
    j["lambda_star"] = m.lambda_star;
    j["residual"] = m.residual;
    j["iterations"] = m.iterations;
    j["residual_history"] = m.residual_history;
    j["lambda_history"] = m.lambda_history;
    j["jacobian"] = m.jacobian;
    if (m.jacobian_fd) {
        j["jacobian_fd"] = *m.jacobian_fd;
        j["scaled_jacobian_defect"] = m.scaled_jacobian_defect;
    }
    j["inside_guaranteed_ball"] = m.inside_guaranteed_ball;
    j["blowup"] = to_json(m.report);
    return j;
}

} // namespace preshock
