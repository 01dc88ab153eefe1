#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "preshock/error.hpp"

namespace preshock {

struct RunConfig {
    double gamma = 1.4;
    int n = 1;
    double epsilon = 1e-3;
    double C0 = 0;  // 0 means Params::default_C0(n)
    int grid = 4096;
    double delta_stop = 5e-3;
    double cfl = 0.4;
    // Seed of the random perturbation; negative means w~0 = z0 = k0 = 0.
    std::int64_t seed = 1;
    // Radius of the perturbation ball; 0 means epsilon (simulate, and manifold for n = 1) or
    // epsilon^2 (manifold for n >= 2).
    double perturbation_radius = 0;
    double fill = 0.5;
    std::string jacobian_mode = "scaled_identity";
    double manifold_tol = 1e-8;
    int manifold_max_iter = 30;
    int polish_steps = 1;
    bool verify_jacobian = false;
    bool control = false;  // also run the off-manifold control lambda_2 += 0.1 eps / L_n
    std::vector<double> lambda0;
    double newton_tol = 1e-10;
    double flatness_rel_tol = 1e-9;
    std::string burgers_data = "prototypical";  // prototypical | increasing
    std::string out = "runs";
    std::string run_id;  // empty: derived from the configuration
    // Sweep grid; empty lists fall back to the single value above.
    std::string sweep_command = "simulate";
    std::vector<int> sweep_n;
    std::vector<double> sweep_epsilon, sweep_gamma;
    std::vector<std::int64_t> sweep_seed;
    int threads = 0;  // 0 means hardware concurrency

    // Throws BadConfig.
    void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& c);
// Deterministic identifier built from the command and the physical parameters.
std::string default_run_id(const std::string& command, const RunConfig& c);

// Condensed outcome of one command, used for sweep tables.
struct RunSummary {
    std::string run_id;
    std::filesystem::path dir;
    int n = 0;
    double gamma = 0, epsilon = 0;
    std::int64_t seed = 0;
    double T_star = 0;
    double T_error = 0;  // (1+alpha) T*/2 - 1
    int flatness_order = 0;
    bool has_cusp = false;
    double exponent = 0, b0 = 0, b1 = 0;
    std::string status = "ok";
};

RunSummary cmd_burgers(const RunConfig& c);
RunSummary cmd_simulate(const RunConfig& c);
RunSummary cmd_manifold(const RunConfig& c);
// Refits the stored profile of a run directory and writes cusp_refit.json next to cusp.json.
// Throws BadArtifact for missing or corrupt files.
RunSummary cmd_cusp_fit(const std::filesystem::path& run_dir);
std::vector<RunSummary> cmd_sweep(const RunConfig& c);

// Exit status for an error code: 10 + the code's value.
int exit_status(Errc e);

// Full command line driver; returns the process exit status.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

} // namespace preshock
