#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "preshock/core.hpp"
#include "preshock/jet.hpp"

namespace preshock {

// Smooth plateau: chi = 1 on [-1, 1], 0 outside [-b, b], built from the exp(-1/u) smooth step.
struct Bump {
    double b = 16.0 / 3.0;

    double operator()(double s) const;
    // Jet in x of chi(scale * x) at x, up to `order`.
    Jet jet(double x, double scale, int order) const;
};

class BaseProfile {
public:
    BaseProfile() = default;
    BaseProfile(int n, double C0, double b, double beta);

    int n() const { return n_; }
    double C0() const { return C0_; }
    double core_radius() const { return 1.0 / C0_; }
    const Bump& bump() const { return chi_; }
    double beta() const { return beta_; }
    double a() const { return a_; }

    // Jet of the derivative profile wbar0' at x (torus-wrapped).
    Jet slope_jet(double x, int order) const;
    double slope(double x) const;
    double value(double x) const;
    // d^order wbar0 at x; order 0 is the value.
    double derivative(double x, int order) const;
    Field samples(const Grid& grid) const;

private:
    int n_ = 1;
    double C0_ = 16.0;
    Bump chi_;
    double beta_ = 0.5;
    double a_ = 0.0;
    // Cumulative integral of wbar0' from 0 at uniform nodes of [0, 1/2].
    std::vector<double> table_;
    double table_h_ = 0.0;
};

// Builds and validates the base profile on a dense 8N grid.
BaseProfile build_wbar(int n, double C0, const Grid& grid);
BaseProfile build_wbar(const Params& params, const Grid& grid);

// Sup-norm ratios ||d^{i+1} wbar0|| / (i! C0^i), i = 0..2n+1, over the dense validation grid.
std::vector<double> wbar_bound_ratios(const BaseProfile& p, int dense_points);

class PerturbationBasis {
public:
    PerturbationBasis() = default;
    PerturbationBasis(int n, double C0, const Bump& chi, const Grid& grid);

    int size() const { return static_cast<int>(fields_.size()); }
    const Field& field(int j) const { return fields_[j - 1]; }  // j = 1..2n-2
    double Ln() const { return Ln_; }
    // d^order of the j-th basis function at x.
    double derivative(int j, double x, int order) const;

private:
    int n_ = 1;
    double C0_ = 16.0;
    Bump chi_;
    std::vector<Field> fields_;
    double Ln_ = 0.0;
};

// Throws NoBasisNeeded for n = 1.
PerturbationBasis build_basis(const Params& params, const Grid& grid);

// Outer radius b of the bump used with a given C0: C0/3, but never below min(C0/2, 3/2).
double default_bump_radius(double C0);

// Everything needed to assemble data for one (params, N).
struct DataFamily {
    Params params;
    Grid grid{4096};
    BaseProfile wbar;
    Field wbar_samples;
    std::optional<PerturbationBasis> basis;

    double Ln() const { return basis ? basis->Ln() : 0.0; }
};

DataFamily make_family(const Params& params, int N);

struct InitialData {
    Params params;
    int N = 0;
    Field w0, z0, k0;
    Field wtilde0;
    std::vector<double> lambda;
};

struct AssembleOptions {
    bool check_A = true;
    bool check_B = true;
    bool check_U = true;
    double U_radius = 0.0;  // radius of the wtilde0 ball; 0 means epsilon
    bool check_Lambda = true;
    bool check_X = true;
};

// w0 = wbar0 + wtilde0 + sum_j lambda_j wtilde_j. Throws NotInAdmissibleSet with the first
// violated inequality.
InitialData assemble(const DataFamily& fam, const Field& wtilde0, const Field& z0, const Field& k0,
                     const std::vector<double>& lambda, const AssembleOptions& opt = {});

// Membership checks; each returns the first violated inequality, if any.
std::optional<std::string> check_A(const InitialData& d, const DataFamily& fam);
std::optional<std::string> check_B(const InitialData& d, const DataFamily& fam);
std::optional<std::string> check_U(const Field& wtilde0, const Field& z0, const Field& k0, const DataFamily& fam,
                                   double radius);
std::optional<std::string> check_X(const Field& wtilde0, const DataFamily& fam);
std::optional<std::string> check_Lambda(const std::vector<double>& lambda, const DataFamily& fam);

// Sup norms of d^p f for p = 0..max_order, from the noise-trimmed spectrum refined to `dense` points.
std::vector<double> derivative_sup_norms(const Field& f, int max_order, int dense);

struct Perturbation {
    Field wtilde0, z0, k0;
};

// Random low-mode trigonometric perturbation. wtilde0 is projected into X_n and every field is
// scaled to `fill` of its bound in U_n(radius) / B_n(radius). Mapping from seed to fields is
// platform independent.
Perturbation random_perturbation(const DataFamily& fam, std::uint64_t seed, double radius, double fill = 0.5,
                                 bool with_w = true, bool with_z = true, bool with_k = true);

// Removes the components of f that violate X_n using the basis.
Field project_X(const Field& f, const DataFamily& fam);

nlohmann::ordered_json to_json(const InitialData& d);
InitialData initial_data_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json params_to_json(const Params& p);
Params params_from_json(const nlohmann::ordered_json& j);

} // namespace preshock
