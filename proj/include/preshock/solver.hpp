#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "preshock/core.hpp"
#include "preshock/initial_data.hpp"

namespace preshock {

// Fields of the fast acoustic characteristic system. eta_xW is eta_x times the differentiated
// Riemann variable W; Wcomp, Zcomp, Kcomp are w, z, k composed with the flow map eta.
struct LagrangianState {
    double t = 0.0;
    Field Sigma, eta_x, eta_xW, Zring, Kring, eta, Wcomp, Zcomp, Kcomp;

    static constexpr int kFields = 9;
    static constexpr std::array<Field LagrangianState::*, kFields> members = {
        &LagrangianState::Sigma, &LagrangianState::eta_x, &LagrangianState::eta_xW,
        &LagrangianState::Zring, &LagrangianState::Kring, &LagrangianState::eta,
        &LagrangianState::Wcomp, &LagrangianState::Zcomp, &LagrangianState::Kcomp};
    static constexpr std::array<const char*, kFields> names = {"Sigma", "eta_x", "eta_xW", "Zring", "Kring",
                                                               "eta",   "Wcomp", "Zcomp",  "Kcomp"};

    int N() const { return static_cast<int>(Sigma.size()); }
    static LagrangianState zeros(int N, double t = 0.0);
};

struct SolverConfig {
    double cfl = 0.4;
    double safety = 0.05;     // dt <= safety * min(eta_x / |eta_xt|)
    double dt_max = 0.05;
    double eta_floor = 1e-6;
    double delta_stop = 5e-3;
    int log_stride = 1;
    long max_steps = 5'000'000;
    bool fail_fast_monitors = true;
    bool dealias = false;     // 2/3 rule on the transported derivatives
    DerivMethod method = DerivMethod::spectral;
};

LagrangianState initialize(const InitialData& data);
LagrangianState initialize(const Field& w0, const Field& z0, const Field& k0, const Params& params);

// Time derivatives of every field. Throws NearBlowup when eta_x < cfg.eta_floor.
LagrangianState rhs(const LagrangianState& s, const Params& params, const SolverConfig& cfg = {});

// Linearization of rhs about `base` applied to the variation `var`; base_rhs = rhs(base).
LagrangianState tangent_rhs(const LagrangianState& base, const LagrangianState& base_rhs,
                            const LagrangianState& var, const Params& params, const SolverConfig& cfg = {});

// Initial variation for a perturbation direction of w0 (z0, k0 held fixed).
LagrangianState tangent_initialize(const Field& direction, const Field& k0, const Params& params);

// One classical RK4 step (no compensation).
LagrangianState step(const LagrangianState& s, double dt, const Params& params, const SolverConfig& cfg = {});

// eta_xt from the eta_x law, pointwise.
Field eta_xt(const LagrangianState& s, const Params& params);

struct MonitorReport {
    double t = 0;
    double Sigma_min = 0, Sigma_max = 0;
    double eta_x_min = 0, eta_x_max = 0;
    double eta_xW_min = 0, eta_xW_max = 0;
    double W_margin = 0;  // max of eta_xW - (-1/2 + 4 eta_x); <= 0 required
    double max_abs_K = 0, max_abs_Z = 0;
    double K_over_eps = 0, Z_over_eps = 0;
    double K_ratio = 0, Z_ratio = 0;  // against Bk eps and Bz eps
    double Bk = 0, Bz = 0;
    bool sigma_ok = true, eta_xW_ok = true, eta_x_ok = true, W_ok = true;

    bool structural_ok() const { return sigma_ok && eta_xW_ok && eta_x_ok && W_ok; }
};

MonitorReport monitor(const LagrangianState& s, const Params& params);

struct CompatResidual {
    double sigma = 0;  // Sigma_x identity
    double w = 0;      // d_x (w o eta) identity
    double max() const { return std::max(sigma, w); }
};

CompatResidual compat_residual(const LagrangianState& s, const Params& params);

struct TrajectoryRow {
    double t, min_eta_x, argmin_x, max_abs_K, max_abs_Z, compat_residual;
    MonitorReport mon;
};

struct RunOptions {
    std::optional<double> t_end;           // stop exactly here instead of at delta_stop
    std::vector<Field> directions;         // co-integrated sensitivity directions
    const Field* k0 = nullptr;             // needed for the sensitivity initial values
};

struct RunResult {
    LagrangianState state;
    std::vector<LagrangianState> tangents;
    std::vector<TrajectoryRow> log;
    long steps = 0;
    bool reached_stop = false;  // min eta_x landed on delta_stop
    double max_compat = 0;
    bool monitors_ok = true;
};

// Integrates until min eta_x lands on cfg.delta_stop (or until opt.t_end). The last step is
// shortened by a secant solve so that the stop criterion holds to ~1e-12.
RunResult run_to_near_blowup(const LagrangianState& s0, const Params& params, const SolverConfig& cfg = {},
                             const RunOptions& opt = {});

// Runs base and variations for one direction of w0.
RunResult sensitivity_run(const InitialData& data, const Field& direction, const SolverConfig& cfg = {},
                          std::optional<double> t_end = std::nullopt);

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& log);

} // namespace preshock
