#pragma once

#include <array>
#include <optional>
#include <vector>

#include "json.hpp"

#include "preshock/core.hpp"
#include "preshock/solver.hpp"

namespace preshock {

// Linear-in-time continuation of eta_x from a snapshot at T_stop:
//   eta_x~(x, t) = eta_x(x, T_stop) + (t - T_stop) eta_xt(x, T_stop)   for all t.
// For t < T_stop the same line is used (the snapshot carries no history).
class ExtendedFlow {
public:
    ExtendedFlow() = default;
    // Off-grid derivatives come from local least-squares fits of the given degree (0 means 2n+4)
    // on a window of half-width fit_radius (0 means 0.75/C0).
    ExtendedFlow(const Params& params, double T_stop, const Field& eta_x, const Field& eta_xt, double fit_radius = 0,
                 int fit_degree = 0);

    const Params& params() const { return params_; }
    double T_stop() const { return T_stop_; }
    int N() const { return static_cast<int>(eta_x_.size()); }
    const Field& eta_x_grid() const { return eta_x_; }
    const Field& eta_xt_grid() const { return eta_xt_; }
    double fit_radius() const { return h_; }
    int fit_degree() const { return degree_; }

    // d^order/dx^order of eta_x~ and of its (time-independent) slope eta_xt~.
    double value(double x, double t, int order = 0) const;
    double rate(double x, int order = 0) const;
    // Orders 0..max_order of both at x.
    std::vector<double> values(double x, double t, int max_order) const;
    std::vector<double> rates(double x, int max_order) const;
    void values_and_rates(double x, double t, int max_order, std::vector<double>& v, std::vector<double>& r) const;

    // eta_x~(., t) on the grid.
    Field grid_values(double t) const;

    // The snapshot itself, when built from a solver state.
    const std::optional<LagrangianState>& state() const { return state_; }
    void set_state(LagrangianState s) { state_ = std::move(s); }

private:
    Params params_;
    double T_stop_ = 0;
    Field eta_x_, eta_xt_;
    double h_ = 0;
    int degree_ = 0;
    std::optional<LagrangianState> state_;
};

ExtendedFlow extend(const LagrangianState& s, const Params& params, double fit_radius = 0, int fit_degree = 0);

// G = ( d^{2n-1} eta_x~ / (2n)!,  -2/(1+alpha) eta_x~ ).
std::array<double, 2> G(double x, double t, const ExtendedFlow& flow);
// Analytic Jacobian of G, row major.
std::array<double, 4> DG(double x, double t, const ExtendedFlow& flow);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
    double min_damping = 1.0 / 1024;
};

struct NewtonIterate {
    int iter;
    double x, t, g1, g2, damping;
};

struct NewtonResult {
    double x = 0, t = 0;
    int iterations = 0;
    double residual = 0;
    double ball_radius = 0;
    std::vector<NewtonIterate> history;
};

// Damped Newton from (0, 2/(1+alpha)) confined to the ball of radius 1/(3(1+alpha)C0).
// Throws NewtonEscapedBall or NewtonStalled.
NewtonResult newton_G(const ExtendedFlow& flow, const NewtonOptions& opt = {});

// First time at which eta_x~ vanishes somewhere: min over x of T_stop - eta_x / eta_xt,
// refined off-grid around the discrete minimizer. Unlike newton_G this needs no flatness.
// Returns (x, t); throws NoBlowup when eta_xt >= 0 everywhere.
std::array<double, 2> first_zero(const ExtendedFlow& flow);

// Default tolerance for the vanishing test. Thresholds are rel_tol * i! * S^{i/2n} with S the
// sup of d^{2n} eta_x~(., t) over the core |x| <= 1/C0.
inline constexpr double kFlatnessRelTol = 1e-9;

struct FlatnessDiagnostics {
    int order = 0;
    double scale = 0;                 // S
    std::vector<double> derivatives;  // d^i eta_x~(x, t), i = 0..2n
    std::vector<double> thresholds;
};

// Largest even 2m with d^1..d^{2m-1} below threshold and d^{2m} above it and positive.
// Throws FlatnessUndetermined if the first derivative above threshold is odd or negative.
int flatness_order(const ExtendedFlow& flow, double x, double t, double rel_tol = kFlatnessRelTol,
                   FlatnessDiagnostics* diag = nullptr);

// Sup over the core of |d^order eta_x~(., t)|, sampled on a dense uniform set.
double core_sup(const ExtendedFlow& flow, double t, int order, int samples = 257);

struct BlowupReport {
    Params params;
    int N = 0;
    double T_stop = 0;
    double x_star = 0, T_star = 0;
    int flatness_order = 0;
    double flatness_rel_tol = kFlatnessRelTol;
    double flatness_scale = 0;
    std::vector<double> flatness_thresholds;
    std::vector<double> derivatives;    // d^i eta_x~(x*, T*), i = 0..2n+1
    std::vector<double> derivatives_t;  // d^i eta_xt~(x*), i = 0..2n+1
    double a_hi = 0;       // a_{2n+1}
    double a_lo = 0;       // a_{2n+2} at x*
    double a_lo_sup = 0;   // sup of the Taylor remainder coefficient over the core
    std::vector<double> f;  // d^1..d^{2n-2} eta_x~(x*, T*); empty for n = 1
    NewtonResult newton;

    // Consistency checks (recorded, never thrown).
    double eta_xt_core_min = 0, eta_xt_core_max = 0;
    bool eta_xt_bounds_ok = false;    // -(2/3)(1+a) <= eta_xt~ <= -(1+a)/3 on the core
    bool min_location_ok = false;     // grid argmin at T_stop within 2 dx of x*
    bool outer_floor_ok = false;      // eta_x >= C0^{-2n}/2 off the core at min(T*, T_stop)
    bool core_2n_ok = false;          // d^{2n} eta_x~(., T*) >= (2n)!/2 on the core
    bool a_hi_ok = false;             // a_{2n+1} > 1/(2(2n+1))
};

// Newton solve, flatness and Taylor data. Flatness failures are recorded as order 0.
BlowupReport analyze(const ExtendedFlow& flow, const NewtonOptions& opt = {},
                     double flatness_rel_tol = kFlatnessRelTol);

nlohmann::ordered_json to_json(const BlowupReport& r);
BlowupReport blowup_report_from_json(const nlohmann::ordered_json& j);

} // namespace preshock
