#pragma once

#include <complex>
#include <ostream>
#include <string>
#include <vector>

namespace preshock {

// Coefficients c_0..c_M of the series inverting the two-term relation x = y^{2n+1} + y^{2n+2}:
//   y = s * ybar(s),  s = x^{1/(2n+1)},  ybar(z) = sum_j (-1)^j c_j z^j / (2n+1)^j.
struct PuiseuxSeries {
    int n = 1;
    std::vector<double> c;           // c_j as doubles
    std::vector<std::string> exact;  // c_j as reduced fractions "p/q"
    // Coefficients of ybar itself: (-1)^j c_j / (2n+1)^j.
    std::vector<double> ybar;
};

// Exact rational recursion (convolution powers), cached per n. Requires 0 <= M <= 64.
const PuiseuxSeries& coefficients(int n, int M);

// Truncated ybar(z) with terms 0..terms-1 (all available terms when terms < 0).
std::complex<double> ybar(const PuiseuxSeries& s, std::complex<double> z, int terms = -1);

struct RadiusEstimate {
    double R = 0;          // conservative estimate of the radius of convergence of ybar
    double M = 0;          // estimate of max |ybar| on |z| = 3R/4, tail included
    double spread = 0;     // relative disagreement of the root test over the last two windows
    bool settled = false;  // spread <= 0.2
};

// Root test and extrapolated ratio test over the last M/4 coefficients and a 64-point evaluation of ybar on |z| = 3R/4.
// Requires M >= 32. With strict, an unsettled estimate throws RadiusUnsettled.
RadiusEstimate radius_and_M(int n, int M, bool strict = false);

struct Inversion {
    double x = 0;      // x - x*
    double bound = 0;  // certified truncation error
};

// Solves y = a_hi x^{2n+1} + a_lo x^{2n+2} for x near 0 by the truncated series with
// terms j = 0..N. Throws OutsideConvergenceBall outside the certified domain and BadConfig for
// a_hi <= 0.
Inversion invert(int n, double a_hi, double a_lo, double y, int N, const RadiusEstimate& est);
Inversion invert(int n, double a_hi, double a_lo, double y, int N);

// Largest |y| for which invert is certified.
double certified_radius(int n, double a_hi, double a_lo, const RadiusEstimate& est);

void write_coefficients_csv(std::ostream& os, const PuiseuxSeries& s);

} // namespace preshock
