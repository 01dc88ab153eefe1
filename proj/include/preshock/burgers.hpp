#pragma once

#include <functional>

#include "preshock/core.hpp"

namespace preshock {

// Profile evaluated as w0(x, order) = d^order w0 / dx^order.
using Profile = std::function<double(double, int)>;

struct BurgersProblem {
    Profile w0;
    double speed = 1.0;  // 1 for plain Burgers, (1+alpha)/2 for the fast acoustic reduction
    // Real-line profiles live on [lo, hi]; periodic ones on the torus [-1/2, 1/2).
    double lo = -1.0;
    double hi = 1.0;
    bool periodic = false;
    int scan_points = 8 * 4096;
    double t_tol = 1e-13;  // relative slack before a time counts as past blowup
    // Optional split w0(x) = linear x + remainder(x). The characteristic map is then evaluated as
    // x (1 + c t linear) + c t remainder(x), free of the cancellation in x + c t w0(x) near t = T*.
    double linear = 0.0;
    std::function<double(double)> remainder;
};

// w0(x) = -x + x^{2n+1}/(2n+1) on [-1, 1].
BurgersProblem prototypical_problem(int n, double speed = 1.0);

double characteristic(double x, double t, const BurgersProblem& p);

// -1/(c inf w0'); throws NoBlowup when w0' is nowhere negative.
double blowup_time(const BurgersProblem& p);

// w(y, t) by inverting the characteristic map. Throws PastBlowup for t > T*.
double evaluate(double y, double t, const BurgersProblem& p);
double evaluate(double y, double t, const BurgersProblem& p, double Tstar);

// Pre-image x of y under x -> x + c t w0(x).
double foot_point(double y, double t, const BurgersProblem& p);

// y -> -(2n+1)^{1/(2n+1)} y^{1/(2n+1)} + y, the profile at the blowup time.
std::function<double(double)> exact_cusp(int n);

// Real odd root sign(v)|v|^{1/m}.
double odd_root(double v, int m);

} // namespace preshock
