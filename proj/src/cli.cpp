#include "preshock/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "preshock/burgers.hpp"
#include "preshock/cusp.hpp"
#include "preshock/initial_data.hpp"
#include "preshock/manifold.hpp"
#include "preshock/puiseux.hpp"
#include "preshock/singularity.hpp"
#include "preshock/solver.hpp"

namespace fs = std::filesystem;

namespace preshock {

namespace {

Params make_params(const RunConfig& c) {
    Params p{c.gamma, c.n, c.epsilon, c.C0 > 0 ? c.C0 : Params::default_C0(c.n)};
    p.validate();
    return p;
}

SolverConfig solver_config(const RunConfig& c) {
    SolverConfig s;
    s.delta_stop = c.delta_stop;
    s.cfl = c.cfl;
    s.log_stride = 10;
    return s;
}

NewtonOptions newton_options(const RunConfig& c) {
    NewtonOptions o;
    o.tol = c.newton_tol;
    return o;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Errc::BadArtifact, "cannot write " + path.string());
    os << text;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(Errc::BadArtifact, "cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

nlohmann::ordered_json read_json(const fs::path& path) {
    try {
        return nlohmann::ordered_json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadArtifact, path.string() + ": " + e.what());
    }
}

fs::path prepare_dir(const RunConfig& c, const std::string& command, RunSummary& s) {
    s.run_id = c.run_id.empty() ? default_run_id(command, c) : c.run_id;
    s.dir = fs::path(c.out) / s.run_id;
    fs::create_directories(s.dir);
    s.n = c.n;
    s.gamma = c.gamma;
    s.epsilon = c.epsilon;
    s.seed = c.seed;
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = to_json(c);
    write_json(s.dir / "config.json", j);
    return s.dir;
}

Perturbation perturbation(const DataFamily& fam, const RunConfig& c, double radius) {
    if (c.seed < 0) {
        const int N = fam.grid.N;
        return {Field(N, 0.0), Field(N, 0.0), Field(N, 0.0)};
    }
    return random_perturbation(fam, static_cast<std::uint64_t>(c.seed), radius, c.fill);
}

void write_trajectory(const fs::path& dir, const std::vector<TrajectoryRow>& log) {
    std::ostringstream os;
    write_trajectory_csv(os, log);
    write_text(dir / "trajectory.csv", os.str());
}

nlohmann::ordered_json cusp_json(const EulerianProfile& pr, const CuspFit& fit, const BlowupReport* rep) {
    nlohmann::ordered_json j;
    j["profile"] = profile_meta_to_json(pr);
    j["fit"] = to_json(fit);
    const int n = pr.params.n;
    j["expected"] = {{"exponent", 1.0 / (2 * n + 1)}, {"b1", -std::pow(2 * n + 1, 1.0 / (2 * n + 1))}};
    j["y_star_torus_distance"] = pr.y_star_distance(0.5);
    if (rep) {
        const auto mc = model_coefficients(*rep, pr.w_taylor);
        double dev = 0.0;
        int used = 0, outside = 0;
        for (int i = 0; i < pr.size(); ++i) {
            const double a = std::abs(pr.dy[i]);
            if (!(a > 0) || a < fit.window.delta_in || a > 0.5 * fit.window.delta_out) continue;
            try {
                dev = std::max(dev, std::abs(puiseux_reconstruct(*rep, pr.w_taylor, pr.dy[i]).w - pr.w[i]));
                ++used;
            } catch (const Error& e) {
                if (e.code() != Errc::OutsideConvergenceBall) throw;
                ++outside;
            }
        }
        j["model"] = {{"b0", mc[0]},
                      {"b1", mc[1]},
                      {"b1_relative_gap", std::abs(mc[1] - fit.b1) / std::abs(fit.b1)},
                      {"inner_max_deviation", dev},
                      {"inner_samples", used},
                      {"outside_certified", outside}};
    }
    return j;
}

// Profile, fit and artifacts for an accepted blowup.
void cusp_stage(const fs::path& dir, const LagrangianState& snapshot, const BlowupReport& rep, const SolverConfig& scfg,
                RunSummary& s) {
    const EulerianProfile pr = eulerian_profile(snapshot, rep, scfg);
    std::ostringstream os;
    write_profile_csv(os, pr);
    write_text(dir / "profile.csv", os.str());
    const CuspFit fit = fit_cusp(pr, rep.params.n);
    write_json(dir / "cusp.json", cusp_json(pr, fit, &rep));
    s.has_cusp = true;
    s.exponent = fit.holder_exponent;
    s.b0 = fit.b0;
    s.b1 = fit.b1;
}

void set_time(RunSummary& s, const Params& p, double T) {
    s.T_star = T;
    s.T_error = 0.5 * (1 + p.alpha()) * T - 1.0;
}

void simulate_into(const RunConfig& c, RunSummary& s) {
    const fs::path dir = prepare_dir(c, "simulate", s);
    const Params p = make_params(c);
    const DataFamily fam = make_family(p, c.grid);
    const double radius = c.perturbation_radius > 0 ? c.perturbation_radius : p.epsilon;
    const Perturbation pert = perturbation(fam, c, radius);
    AssembleOptions ao;
    ao.U_radius = radius;
    const InitialData data = assemble(fam, pert.wtilde0, pert.z0, pert.k0, std::vector<double>(std::max(0, 2 * p.n - 2), 0.0), ao);
    const SolverConfig scfg = solver_config(c);
    const RunResult run = run_to_near_blowup(initialize(data), p, scfg);
    write_trajectory(dir, run.log);
    const ExtendedFlow flow = extend(run.state, p);
    const auto fz = first_zero(flow);
    set_time(s, p, fz[1]);
    nlohmann::ordered_json extra;
    extra["first_zero"] = {{"x", fz[0]}, {"t", fz[1]}};
    extra["steps"] = run.steps;
    extra["monitors_ok"] = run.monitors_ok;
    extra["max_compat_residual"] = run.max_compat;
    BlowupReport rep;
    try {
        rep = analyze(flow, newton_options(c), c.flatness_rel_tol);
    } catch (const Error& e) {
        extra["newton_error"] = std::string(errc_name(e.code()));
        write_json(dir / "blowup.json", extra);
        throw;
    }
    rep.N = c.grid;
    nlohmann::ordered_json j = to_json(rep);
    for (auto& [k, v] : extra.items()) j[k] = v;
    write_json(dir / "blowup.json", j);
    set_time(s, p, rep.T_star);
    s.flatness_order = rep.flatness_order;
    if (rep.flatness_order == 2 * p.n) cusp_stage(dir, run.state, rep, scfg, s);
}

void manifold_into(const RunConfig& c, RunSummary& s) {
    const fs::path dir = prepare_dir(c, "manifold", s);
    const Params p = make_params(c);
    const DataFamily fam = make_family(p, c.grid);
    const double radius =
        c.perturbation_radius > 0 ? c.perturbation_radius : (p.n == 1 ? p.epsilon : p.epsilon * p.epsilon);
    const Perturbation pert = perturbation(fam, c, radius);
    ManifoldOptions mo;
    mo.mode = parse_jacobian_mode(c.jacobian_mode);
    mo.tol = c.manifold_tol;
    mo.max_iter = c.manifold_max_iter;
    mo.polish_steps = c.polish_steps;
    mo.verify_jacobian = c.verify_jacobian;
    mo.U_radius = radius;
    mo.lambda0 = c.lambda0;
    mo.solver = solver_config(c);
    mo.newton = newton_options(c);
    mo.flatness_rel_tol = c.flatness_rel_tol;
    const ManifoldPoint mp = solve_lambda(fam, pert.wtilde0, pert.z0, pert.k0, mo);
    write_trajectory(dir, mp.trajectory);
    BlowupReport rep = mp.report;
    rep.N = c.grid;
    write_json(dir / "blowup.json", to_json(rep));
    nlohmann::ordered_json mj = to_json(mp);
    mj.erase("blowup");
    if (c.control && p.n >= 2) {
        auto lambda = mp.lambda_star;
        lambda[1] += 0.1 * p.epsilon / fam.Ln();
        AssembleOptions quiet;
        quiet.check_U = quiet.check_Lambda = false;
        const FEvaluation ev = evaluate_f(fam, pert.wtilde0, pert.z0, pert.k0, lambda, mo, false, quiet);
        mj["control"] = {{"lambda", lambda},
                         {"flatness_order", ev.report.flatness_order},
                         {"f", ev.f},
                         {"derivatives", ev.report.derivatives}};
    }
    write_json(dir / "manifold.json", mj);
    set_time(s, p, rep.T_star);
    s.flatness_order = rep.flatness_order;
    if (rep.flatness_order == 2 * p.n) cusp_stage(dir, mp.state, rep, mo.solver, s);
}

BurgersProblem increasing_problem() {
    BurgersProblem b;
    b.w0 = [](double x, int order) { return order == 0 ? x : (order == 1 ? 1.0 : 0.0); };
    return b;
}

void burgers_into(const RunConfig& c, RunSummary& s) {
    const fs::path dir = prepare_dir(c, "burgers", s);
    const Params p = make_params(c);
    const int n = p.n;
    const double a = p.alpha();
    nlohmann::ordered_json sum;
    if (c.burgers_data != "prototypical" && c.burgers_data != "increasing")
        throw Error(Errc::BadConfig, "burgers_data must be prototypical or increasing");
    const BurgersProblem plain = c.burgers_data == "increasing" ? increasing_problem() : prototypical_problem(n, 1.0);
    const double T1 = blowup_time(plain);
    const double T2 = blowup_time(prototypical_problem(n, 0.5 * (1 + a)));
    sum["T_star"] = T1;
    sum["T_star_reduced"] = T2;
    sum["T_star_reduced_expected"] = 2.0 / (1 + a);

    // Exact cusp against the characteristic inversion on 0 < |y| < 1e-3.
    const auto exact = exact_cusp(n);
    std::vector<double> ys, ws;
    const int per_side = 400;
    for (int side = -1; side <= 1; side += 2)
        for (int i = 0; i < per_side; ++i) {
            const double m = std::pow(10.0, -12.0 + 9.0 * i / (per_side - 1));
            ys.push_back(side * m);
        }
    std::sort(ys.begin(), ys.end());
    double cusp_err = 0.0;
    for (double y : ys) {
        const double w = evaluate(y, T1, plain, T1);
        ws.push_back(w);
        cusp_err = std::max(cusp_err, std::abs(w - exact(y)));
    }
    sum["cusp_max_error"] = cusp_err;
    const EulerianProfile pr = profile_from_samples(p, ys, ws, 0.0);
    std::ostringstream os;
    write_profile_csv(os, pr);
    write_text(dir / "profile.csv", os.str());
    const CuspFit fit = fit_cusp(pr, n, CuspWindow{1e-12, 1e-6});
    write_json(dir / "cusp.json", cusp_json(pr, fit, nullptr));
    s.has_cusp = true;
    s.exponent = fit.holder_exponent;
    s.b0 = fit.b0;
    s.b1 = fit.b1;

    // Euler with z0 = k0 = 0 and w0 = wbar0 reduces to Burgers with speed (1+alpha)/2.
    const DataFamily fam = make_family(p, c.grid);
    const Field zero(c.grid, 0.0);
    AssembleOptions ao;
    ao.check_U = false;
    const InitialData data = assemble(fam, zero, zero, zero, std::vector<double>(std::max(0, 2 * n - 2), 0.0), ao);
    const SolverConfig scfg = solver_config(c);
    RunOptions ro;
    ro.t_end = 0.95 * 2.0 / (1 + a);
    const RunResult part = run_to_near_blowup(initialize(data), p, scfg, ro);
    double err = 0.0;
    for (int i = 0; i < c.grid; ++i)
        err = std::max(err, std::abs(part.state.eta_x[i] - (1 + 0.5 * (1 + a) * part.state.t * fam.wbar.slope(fam.grid.x(i)))));
    sum["reduction_t"] = part.state.t;
    sum["reduction_eta_x_error"] = err;
    const RunResult run = run_to_near_blowup(initialize(data), p, scfg);
    write_trajectory(dir, run.log);
    BlowupReport rep = analyze(extend(run.state, p), newton_options(c), c.flatness_rel_tol);
    rep.N = c.grid;
    write_json(dir / "blowup.json", to_json(rep));
    sum["reduction_T_star"] = rep.T_star;
    sum["reduction_T_error"] = 0.5 * (1 + a) * rep.T_star - 1.0;
    sum["reduction_x_star"] = rep.x_star;
    write_json(dir / "burgers.json", sum);
    set_time(s, p, rep.T_star);
    s.flatness_order = rep.flatness_order;
}

template <class T>
std::vector<T> or_single(const std::vector<T>& v, T fallback) {
    return v.empty() ? std::vector<T>{fallback} : v;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void RunConfig::validate() const {
    auto bad = [](const std::string& m) { throw Error(Errc::BadConfig, m); };
    if (!is_power_of_two(grid) || grid < 64) bad("grid must be a power of two >= 64");
    if (!(delta_stop > 0 && delta_stop < 1)) bad("delta_stop must lie in (0, 1)");
    if (!(cfl > 0)) bad("cfl must be positive");
    if (!(manifold_tol > 0) || !(newton_tol > 0) || !(flatness_rel_tol > 0)) bad("tolerances must be positive");
    if (perturbation_radius < 0) bad("perturbation_radius must be >= 0");
    if (!(fill > 0 && fill < 1)) bad("fill must lie in (0, 1)");
    if (manifold_max_iter < 0 || polish_steps < 0 || threads < 0) bad("counts must be >= 0");
    if (sweep_command != "simulate" && sweep_command != "manifold") bad("sweep_command must be simulate or manifold");
    parse_jacobian_mode(jacobian_mode);
    make_params(*this);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["gamma"] = c.gamma;
    j["n"] = c.n;
    j["epsilon"] = c.epsilon;
    j["C0"] = c.C0 > 0 ? c.C0 : Params::default_C0(c.n);
    j["grid"] = c.grid;
    j["delta_stop"] = c.delta_stop;
    j["cfl"] = c.cfl;
    j["seed"] = c.seed;
    j["perturbation_radius"] = c.perturbation_radius;
    j["fill"] = c.fill;
    j["jacobian_mode"] = c.jacobian_mode;
    j["manifold_tol"] = c.manifold_tol;
    j["manifold_max_iter"] = c.manifold_max_iter;
    j["polish_steps"] = c.polish_steps;
    j["verify_jacobian"] = c.verify_jacobian;
    j["control"] = c.control;
    j["lambda0"] = c.lambda0;
    j["newton_tol"] = c.newton_tol;
    j["flatness_rel_tol"] = c.flatness_rel_tol;
    j["burgers_data"] = c.burgers_data;
    j["run_id"] = c.run_id;
    return j;
}

std::string default_run_id(const std::string& command, const RunConfig& c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s-n%d-g%g-e%g-N%d-s%lld", command.c_str(), c.n, c.gamma, c.epsilon, c.grid,
                  static_cast<long long>(c.seed));
    return buf;
}

int exit_status(Errc e) { return 10 + static_cast<int>(e); }

RunSummary cmd_simulate(const RunConfig& c) {
    c.validate();
    RunSummary s;
    simulate_into(c, s);
    return s;
}

RunSummary cmd_manifold(const RunConfig& c) {
    c.validate();
    RunSummary s;
    manifold_into(c, s);
    return s;
}

RunSummary cmd_burgers(const RunConfig& c) {
    c.validate();
    RunSummary s;
    burgers_into(c, s);
    return s;
}

RunSummary cmd_cusp_fit(const fs::path& dir) {
    for (const char* f : {"blowup.json", "cusp.json", "profile.csv"})
        if (!fs::exists(dir / f)) throw Error(Errc::BadArtifact, "missing " + (dir / f).string());
    const nlohmann::ordered_json cj = read_json(dir / "cusp.json");
    if (!cj.contains("profile")) throw Error(Errc::BadArtifact, "cusp.json lacks the profile block");
    EulerianProfile pr = profile_meta_from_json(cj.at("profile"));
    {
        std::ifstream is(dir / "profile.csv", std::ios::binary);
        read_profile_csv(is, pr);
    }
    const nlohmann::ordered_json bj = read_json(dir / "blowup.json");
    std::optional<BlowupReport> rep;
    if (cj.contains("model")) rep = blowup_report_from_json(bj);
    CuspWindow w;
    try {
        w.delta_in = cj.at("fit").at("window").at("delta_in").get<double>();
        w.delta_out = cj.at("fit").at("window").at("delta_out").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::BadArtifact, std::string("cusp.json window: ") + e.what());
    }
    const CuspFit fit = fit_cusp(pr, pr.params.n, w);
    write_json(dir / "cusp_refit.json", cusp_json(pr, fit, rep ? &*rep : nullptr));
    RunSummary s;
    s.run_id = dir.filename().string();
    s.dir = dir;
    s.n = pr.params.n;
    s.gamma = pr.params.gamma;
    s.epsilon = pr.params.epsilon;
    s.has_cusp = true;
    s.exponent = fit.holder_exponent;
    s.b0 = fit.b0;
    s.b1 = fit.b1;
    return s;
}

std::vector<RunSummary> cmd_sweep(const RunConfig& c) {
    c.validate();
    std::vector<RunConfig> jobs;
    const std::string sweep_id = c.run_id.empty() ? "sweep-" + c.sweep_command : c.run_id;
    for (int n : or_single(c.sweep_n, c.n))
        for (double g : or_single(c.sweep_gamma, c.gamma))
            for (double e : or_single(c.sweep_epsilon, c.epsilon))
                for (std::int64_t seed : or_single(c.sweep_seed, c.seed)) {
                    RunConfig r = c;
                    r.n = n;
                    r.gamma = g;
                    r.epsilon = e;
                    r.seed = seed;
                    r.C0 = 0;
                    r.run_id.clear();
                    r.out = (fs::path(c.out) / sweep_id).string();
                    r.validate();
                    jobs.push_back(r);
                }
    std::vector<RunSummary> out(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            RunSummary& s = out[i];
            try {
                if (c.sweep_command == "manifold")
                    manifold_into(jobs[i], s);
                else
                    simulate_into(jobs[i], s);
            } catch (const Error& e) {
                s.status = std::string(errc_name(e.code()));
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nt = std::min<std::size_t>(jobs.size(), c.threads > 0 ? c.threads : hw);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    const fs::path dir = fs::path(c.out) / sweep_id;
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "run_id,n,gamma,epsilon,seed,T_star,T_error,flatness_order,exponent,b1,status\n";
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const RunSummary& s : out) {
        csv << s.run_id << ',' << s.n << ',' << fmt_double(s.gamma) << ',' << fmt_double(s.epsilon) << ',' << s.seed
            << ',' << fmt_double(s.T_star) << ',' << fmt_double(s.T_error) << ',' << s.flatness_order << ','
            << (s.has_cusp ? fmt_double(s.exponent) : "") << ',' << (s.has_cusp ? fmt_double(s.b1) : "") << ','
            << s.status << '\n';
        nlohmann::ordered_json r;
        r["run_id"] = s.run_id;
        r["n"] = s.n;
        r["gamma"] = s.gamma;
        r["epsilon"] = s.epsilon;
        r["seed"] = s.seed;
        r["T_star"] = s.T_star;
        r["T_error"] = s.T_error;
        r["flatness_order"] = s.flatness_order;
        if (s.has_cusp) {
            r["exponent"] = s.exponent;
            r["b1"] = s.b1;
        }
        r["status"] = s.status;
        rows.push_back(r);
    }
    write_text(dir / "sweep.csv", csv.str());
    write_json(dir / "sweep.json", {{"command", c.sweep_command}, {"runs", rows}});
    return out;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Pre-shock formation laboratory for the 1D Euler equations"};
    app.set_config("--config", "", "Flat key = value configuration file (command-line flags take precedence)");
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig c;
    app.add_option("--n", c.n, "Flatness parameter n >= 1");
    app.add_option("--epsilon", c.epsilon, "Size of the perturbation class");
    app.add_option("--gamma", c.gamma, "Adiabatic exponent > 1");
    app.add_option("--C0", c.C0, "Core constant; 0 selects the default for n");
    app.add_option("--grid", c.grid, "Number of grid points (power of two)");
    app.add_option("--delta-stop,--delta_stop", c.delta_stop, "Stop when min eta_x reaches this value");
    app.add_option("--cfl", c.cfl, "CFL number");
    app.add_option("--seed", c.seed, "Perturbation seed; negative for unperturbed data");
    app.add_option("--perturbation-radius,--perturbation_radius", c.perturbation_radius, "Radius of the perturbation ball; 0 = default");
    app.add_option("--fill", c.fill, "Fraction of the admissible bound used by random perturbations");
    app.add_option("--jacobian-mode,--jacobian_mode", c.jacobian_mode, "scaled_identity | finite_difference | sensitivity");
    app.add_option("--manifold-tol,--manifold_tol", c.manifold_tol, "Target |f_n|");
    app.add_option("--manifold-max-iter,--manifold_max_iter", c.manifold_max_iter, "Newton iterations for lambda");
    app.add_option("--polish-steps,--polish_steps", c.polish_steps, "Extra steps after convergence");
    app.add_flag("--verify-jacobian,--verify_jacobian", c.verify_jacobian, "Also compute a finite-difference Jacobian");
    app.add_flag("--control", c.control, "Also run the off-manifold control");
    app.add_option("--lambda0", c.lambda0, "Starting lambda");
    app.add_option("--newton-tol,--newton_tol", c.newton_tol, "Tolerance of the (x*, T*) Newton solve");
    app.add_option("--flatness-rel-tol,--flatness_rel_tol", c.flatness_rel_tol, "Relative tolerance of the vanishing test");
    app.add_option("--burgers-data,--burgers_data", c.burgers_data, "prototypical | increasing");
    app.add_option("--out", c.out, "Output directory")->envname("PRESHOCK_OUT");
    app.add_option("--run-id,--run_id", c.run_id, "Run directory name; derived from the configuration when empty");
    app.add_option("--sweep-command,--sweep_command", c.sweep_command, "simulate | manifold");
    app.add_option("--sweep-n,--sweep_n", c.sweep_n, "Values of n");
    app.add_option("--sweep-epsilon,--sweep_epsilon", c.sweep_epsilon, "Values of epsilon");
    app.add_option("--sweep-gamma,--sweep_gamma", c.sweep_gamma, "Values of gamma");
    app.add_option("--sweep-seed,--sweep_seed", c.sweep_seed, "Seeds");
    app.add_option("--threads", c.threads, "Sweep workers; 0 = hardware concurrency");

    auto* burgers = app.add_subcommand("burgers", "Exact Burgers checks and the Euler reduction");
    auto* simulate = app.add_subcommand("simulate", "Assemble, integrate, locate the blowup, fit the cusp");
    auto* manifold = app.add_subcommand("manifold", "Solve for lambda*, then analyze the cusp");
    auto* cusp = app.add_subcommand("cusp-fit", "Refit the stored profile of a run directory");
    std::string run_dir;
    cusp->add_option("run_dir", run_dir, "Run directory")->required();
    auto* sweep = app.add_subcommand("sweep", "Run a grid of configurations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_status(Errc::BadConfig);
    }

    try {
        auto report = [](const RunSummary& s) {
            std::cout << "run " << s.run_id << " -> " << s.dir.string() << "\n";
            std::cout << "T* = " << fmt_double(s.T_star) << "  (1+a)T*/2 - 1 = " << fmt_double(s.T_error)
                      << "  flatness = " << s.flatness_order << "\n";
            if (s.has_cusp)
                std::cout << "b0 = " << fmt_double(s.b0) << "  b1 = " << fmt_double(s.b1)
                          << "  exponent = " << fmt_double(s.exponent) << "\n";
        };
        if (*burgers) {
            const RunSummary s = cmd_burgers(c);
            std::cout << "Burgers T* = " << fmt_double(blowup_time(prototypical_problem(c.n))) << "\n";
            report(s);
        } else if (*simulate) {
            report(cmd_simulate(c));
        } else if (*manifold) {
            report(cmd_manifold(c));
        } else if (*cusp) {
            report(cmd_cusp_fit(run_dir));
        } else if (*sweep) {
            for (const RunSummary& s : cmd_sweep(c)) std::cout << s.run_id << " " << s.status << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_status(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: BadArtifact: " << e.what() << "\n";
        return exit_status(Errc::BadArtifact);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace preshock
