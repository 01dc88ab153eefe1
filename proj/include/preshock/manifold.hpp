#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "preshock/initial_data.hpp"
#include "preshock/singularity.hpp"
#include "preshock/solver.hpp"

namespace preshock {

enum class JacobianMode { scaled_identity, finite_difference, sensitivity };

std::string jacobian_mode_name(JacobianMode m);
// Throws BadConfig for unknown names.
JacobianMode parse_jacobian_mode(const std::string& s);

using Matrix = std::vector<std::vector<double>>;

struct ManifoldOptions {
    JacobianMode mode = JacobianMode::scaled_identity;
    double tol = 1e-8;
    int max_iter = 30;
    // Extra Newton steps taken after the tolerance is met, to push the residual to its floor.
    int polish_steps = 1;
    // Estimate D_lambda f_n by central differences at the final iterate.
    bool verify_jacobian = false;
    // Radius of the U_n ball required of (wtilde0, z0, k0); 0 means epsilon^2.
    double U_radius = 0;
    bool check_admissible = true;
    std::vector<double> lambda0;  // starting point; empty means 0
    SolverConfig solver;
    NewtonOptions newton;
    double flatness_rel_tol = kFlatnessRelTol;
};

// Finite-difference step for D_lambda f_n.
double fd_step(double epsilon);

struct FEvaluation {
    std::vector<double> f;
    BlowupReport report;
    InitialData data;
    RunResult run;
    std::optional<Matrix> sensitivity;  // D_lambda f_n from co-integrated variations
};

// One f_n evaluation: assemble, integrate, extend, Newton on G. With sensitivity, the
// variations along the basis directions are co-integrated and D_lambda f_n is returned too.
FEvaluation evaluate_f(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                       const std::vector<double>& lambda, const ManifoldOptions& opt, bool sensitivity = false,
                       const AssembleOptions& checks = {});

// f_n for already assembled data.
std::vector<double> f_n(const InitialData& data, const SolverConfig& cfg = {}, const NewtonOptions& newton = {});

struct ManifoldPoint {
    Params params;
    int N = 0;
    std::vector<double> lambda_star;
    double residual = 0;
    int iterations = 0;
    std::vector<double> residual_history;
    std::vector<std::vector<double>> lambda_history;
    JacobianMode mode = JacobianMode::scaled_identity;
    Matrix jacobian;                    // the one used in the last step
    std::optional<Matrix> jacobian_fd;  // verification
    double scaled_jacobian_defect = 0;  // ||(2/((1+a)T)) J_fd - Id||_inf, when verified
    bool inside_guaranteed_ball = true;
    InitialData data;
    BlowupReport report;
    LagrangianState state;  // snapshot at T_stop of the accepted run
    std::vector<TrajectoryRow> trajectory;
};

// Newton iteration lambda <- lambda - J^{-1} f_n(lambda) until |f_n| <= tol. For n = 1 this
// runs the pipeline once and returns an empty lambda. Throws LeftParameterBox or
// ManifoldNewtonStalled.
ManifoldPoint solve_lambda(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                           const ManifoldOptions& opt = {});

// Central-difference D_lambda f_n at lambda.
Matrix fd_jacobian(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                   const std::vector<double>& lambda, const ManifoldOptions& opt);

nlohmann::ordered_json to_json(const ManifoldPoint& m);

} // namespace preshock
