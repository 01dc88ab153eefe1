#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <vector>

#include "json.hpp"

#include "preshock/singularity.hpp"
#include "preshock/solver.hpp"

namespace preshock {

// Samples of the Eulerian solution at T* on the nonuniform points y_i = eta(x_i, T*).
struct EulerianProfile {
    Params params;
    double T = 0;
    double x_star = 0, y_star = 0;  // y_star unwrapped (y lives on the lifted line)
    std::vector<double> x, y, dy;   // dy = y - y_star, accurate near the cusp
    std::vector<double> w, z, k;
    std::vector<double> z_y, k_y;   // d_y z and d_y k at the samples
    // w o eta(x_star + h, T) ~ B0 + B1 h + B2 h^2
    std::array<double, 3> w_taylor{};
    double z_star = 0, k_star = 0;  // z and k at y_star
    double dy_local = 0;      // y spacing of the samples next to y_star
    double smear_radius = 0;  // |y - y_star| below which the linear continuation error exceeds 1% of eta_x

    int size() const { return static_cast<int>(y.size()); }
    // Torus distance between y_star and target.
    double y_star_distance(double target) const;
};

// Profile at rep.T_star from a snapshot s at s.t <= T_star. The fields are continued over the
// sliver [s.t, T_star] by one forward step of the Lagrangian system, the same linear model that
// defines eta_x~. Throws InconsistentTimes when rep.T_star < s.t beyond roundoff.
EulerianProfile eulerian_profile(const LagrangianState& s, const BlowupReport& rep, const SolverConfig& cfg = {});

// Profile from given samples (no Lagrangian data); dy = y - y_star.
EulerianProfile profile_from_samples(const Params& params, const std::vector<double>& y, const std::vector<double>& w,
                                     double y_star);

struct CuspWindow {
    double delta_in = 0, delta_out = 0;
};

// 1/((2n+2)(2n+1) 2^{2n+2} C0^{2n+1}).
double theorem_window(int n, double C0);
// [max(4 dy_local, 10 smear_radius), theorem_window].
CuspWindow default_window(const EulerianProfile& p);

struct SideFit {
    int samples = 0;
    double b0 = 0, b1 = 0, b2 = 0;
};

struct CuspFit {
    int n = 1;
    double y_star = 0;
    CuspWindow window;
    double b0 = 0, b1 = 0, b2 = 0;  // w ~ b0 + b1 s + b2 s^2, s = sign(y - y*)|y - y*|^{1/(2n+1)}
    double residual_rms = 0, residual_max = 0;
    SideFit left, right;
    double holder_exponent = 0;
    double z_slope = 0, k_slope = 0;      // log-log slopes of |z - z*|, |k - k*| (1 for C^1 data)
    double z_y_slope = 0, k_y_slope = 0;  // log-log slopes of |z_y|, |k_y|; >= 0 means bounded
};

// Least squares of w on {1, s, s^2} over delta_in <= |y - y*| <= delta_out. Throws
// FitDegenerate with fewer than 50 samples on either side or a rank-deficient design.
CuspFit fit_cusp(const EulerianProfile& p, int n, const CuspWindow& window);
CuspFit fit_cusp(const EulerianProfile& p, int n);

// Median of pairwise slopes of log|w - b0| against log|y - y*| over the window; b0 from fit_cusp.
double holder_exponent(const EulerianProfile& p, int n, const CuspWindow& window);
double holder_exponent(const EulerianProfile& p, int n);
double holder_exponent(const EulerianProfile& p, int n, const CuspWindow& window, double b0);

struct Reconstruction {
    double x_shift = 0;  // x - x*
    double w = 0;        // predicted w(y* + y_shift, T*)
    double bound = 0;    // truncation bound on x_shift
};

// Model cusp from the report's Taylor data: invert y - y* = a_hi h^{2n+1} + a_lo h^{2n+2} for h,
// then w = B0 + B1 h + B2 h^2. Throws OutsideConvergenceBall.
Reconstruction puiseux_reconstruct(const BlowupReport& rep, const std::array<double, 3>& w_taylor, double y_shift,
                                   int terms = 16);

// (b0, b1) implied by the Taylor data: (B0, B1 a_hi^{-1/(2n+1)}).
std::array<double, 2> model_coefficients(const BlowupReport& rep, const std::array<double, 3>& w_taylor);

// Columns x,y,dy,w,z,k,z_y,k_y.
void write_profile_csv(std::ostream& os, const EulerianProfile& p);
// Reads the samples back; the scalar metadata comes from profile_meta_from_json. Throws BadArtifact.
void read_profile_csv(std::istream& is, EulerianProfile& p);

nlohmann::ordered_json profile_meta_to_json(const EulerianProfile& p);
EulerianProfile profile_meta_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const CuspFit& f);

} // namespace preshock
