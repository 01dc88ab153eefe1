#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "preshock/error.hpp"

namespace preshock {

struct Params {
    double gamma = 1.4;
    int n = 1;
    double epsilon = 1e-3;
    double C0 = 16.0;

    double alpha() const { return 0.5 * (gamma - 1.0); }

    // Smallest C0 for which the blended base profile meets every derivative bound
    // (see initial_data.hpp); 3 is never enough on the torus because w̄₀′ must have zero mean.
    static double default_C0(int n) { return n <= 2 ? 16.0 : 8.0 + 4.0 * n; }

    static Params make(double gamma, int n, double epsilon) { return {gamma, n, epsilon, default_C0(n)}; }

    // Throws BadConfig when gamma, n, epsilon or C0 leave their admissible ranges.
    void validate() const;
};

using Field = std::vector<double>;

// Uniform periodic grid on [-1/2, 1/2).
struct Grid {
    int N = 0;

    explicit Grid(int n_points);
    double dx() const { return 1.0 / N; }
    double x(int i) const { return -0.5 + i * dx(); }
    Field nodes() const;
};

bool is_power_of_two(int n);

// Throws NonFiniteField naming `what` if any entry is NaN or infinite.
void check_finite(const Field& f, const char* what);

enum class DerivMethod { spectral, central_fd };

// d^order f / dx^order on the periodic grid. Spectral differentiation drops the Nyquist mode.
Field periodic_derivative(const Field& f, int order, DerivMethod method = DerivMethod::spectral);

// Low-level spectral helpers. The one-sided spectrum has N/2+1 entries of the unnormalized DFT.
std::vector<std::complex<double>> forward_spectrum(const Field& f);
Field inverse_spectrum(const std::vector<std::complex<double>>& spec, int N);

// First spectral derivative written into `out` without allocating (the solver's inner loop).
// With dealias, modes above N/3 are zeroed.
void spectral_dx_into(const Field& f, Field& out, bool dealias = false);

// Band-limited resampling of a periodic field onto M >= N points.
Field refine(const Field& f, int M);

double max_abs(const Field& f);

struct MinLoc {
    double value = 0;  // parabola vertex value (equals the node value at ties / flat spots)
    double x = 0;      // sub-grid location, wrapped to [-1/2, 1/2)
    int index = 0;     // node index of the discrete minimum (smallest index on ties)
    double node_value = 0;
};

MinLoc min_with_location(const Field& f);

// Wraps x to the torus representative in [-1/2, 1/2).
double wrap_torus(double x);

// Trigonometric interpolant of a periodic grid field, with optional truncation of the
// roundoff plateau so that high-order derivatives evaluated off-grid are not noise-dominated.
class TrigInterpolant {
public:
    TrigInterpolant() = default;
    // noise_trim: if true, modes above the last one standing clearly above the spectral
    // noise plateau are discarded.
    explicit TrigInterpolant(const Field& f, bool noise_trim = false);

    int N() const { return N_; }
    int cutoff() const { return kmax_; }

    // d^order/dx^order of the interpolant at arbitrary x.
    double operator()(double x, int order = 0) const;
    // Several derivative orders 0..max_order at x in one pass.
    std::vector<double> derivatives(double x, int max_order) const;
    // Derivative of the (possibly trimmed) interpolant sampled back on the grid.
    Field on_grid(int order) const;

private:
    int N_ = 0;
    int kmax_ = 0;
    std::vector<std::complex<double>> c_;  // normalized coefficients, k = 0..kmax
};

// Derivatives at x0 of the weighted least-squares polynomial of a given degree through the grid
// samples with |x - x0| < half_width (torus distance), weights (1 - (d/half_width)^2)^2. Far more accurate than the global interpolant for
// high orders, whose error is dominated by roundoff at high wavenumbers.
class LocalTaylor {
public:
    LocalTaylor() = default;
    LocalTaylor(int N, double x0, double half_width, int degree) : LocalTaylor(N, x0, half_width, half_width, degree) {}
    // Asymmetric window [x0 - left, x0 + right].
    LocalTaylor(int N, double x0, double left, double right, int degree);

    int degree() const { return degree_; }
    // d^k f(x0), k = 0..max_order (max_order <= degree).
    std::vector<double> derivatives(const Field& f, int max_order) const;

private:
    int N_ = 0, degree_ = 0;
    double h_ = 0;
    std::vector<int> idx_;
    std::vector<std::vector<double>> rows_;  // rows of the pseudo-inverse, one per coefficient
};

// Composite Gauss-Legendre quadrature of g over [a, b] with `panels` panels of 16 nodes.
double integrate(const std::function<double(double)>& g, double a, double b, int panels = 8);

// Bracketed root of a continuous g on [a, b] with g(a), g(b) of opposite sign:
// bisection-safeguarded secant. Throws InversionFailed when the bracket is invalid.
double bracketed_root(const std::function<double(double)>& g, double a, double b, double xtol = 1e-15,
                      int max_iter = 200);

} // namespace preshock
