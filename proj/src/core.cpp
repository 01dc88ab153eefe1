#include "preshock/core.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace preshock {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW plans are created once per size under a lock; execution uses the new-array
// interface on thread-local buffers, which is thread safe.
struct Plan {
    int N = 0;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

const Plan& plan_for(int N) {
    static std::map<int, std::unique_ptr<Plan>> plans;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = plans.find(N);
    if (it != plans.end()) return *it->second;
    auto p = std::make_unique<Plan>();
    p->N = N;
    double* in = fftw_alloc_real(N);
    fftw_complex* out = fftw_alloc_complex(N / 2 + 1);
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence every rounding, reproducible.
    p->r2c = fftw_plan_dft_r2c_1d(N, in, out, FFTW_ESTIMATE);
    p->c2r = fftw_plan_dft_c2r_1d(N, out, in, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    return *plans.emplace(N, std::move(p)).first->second;
}

struct Buffers {
    int N = 0;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    ~Buffers() {
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
    }
    void ensure(int n) {
        if (n == N) return;
        if (real) fftw_free(real);
        if (spec) fftw_free(spec);
        N = n;
        real = fftw_alloc_real(n);
        spec = fftw_alloc_complex(n / 2 + 1);
    }
};

Buffers& buffers() {
    thread_local Buffers b;
    return b;
}

// Multiplies the one-sided spectrum by (i k)^order, zeroing the Nyquist mode, and folds in 1/N.
void apply_derivative(fftw_complex* c, int N, int order) {
    const double inv = 1.0 / N;
    for (int k = 0; k <= N / 2; ++k) {
        if (k == N / 2 || (k == 0 && order > 0)) {
            c[k][0] = c[k][1] = 0.0;
            continue;
        }
        std::complex<double> m = std::pow(std::complex<double>(0.0, kTwoPi * k), order) * inv;
        std::complex<double> v(c[k][0], c[k][1]);
        v *= m;
        c[k][0] = v.real();
        c[k][1] = v.imag();
    }
}

Field spectral_derivative(const Field& f, int order) {
    const int N = static_cast<int>(f.size());
    const Plan& p = plan_for(N);
    Buffers& b = buffers();
    b.ensure(N);
    std::copy(f.begin(), f.end(), b.real);
    fftw_execute_dft_r2c(p.r2c, b.real, b.spec);
    apply_derivative(b.spec, N, order);
    fftw_execute_dft_c2r(p.c2r, b.spec, b.real);
    return Field(b.real, b.real + N);
}

// Fornberg's algorithm: weights for the m-th derivative at 0 on the given offsets.
std::vector<double> fd_weights(const std::vector<double>& offsets, int m) {
    const int np = static_cast<int>(offsets.size());
    std::vector<std::vector<double>> c(np, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = offsets[0];
    c[0][0] = 1.0;
    for (int i = 1; i < np; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = offsets[i];
        for (int j = 0; j < i; ++j) {
            const double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(np);
    for (int i = 0; i < np; ++i) w[i] = c[i][m];
    return w;
}

Field fd_derivative(const Field& f, int order) {
    const int N = static_cast<int>(f.size());
    const int r = (order + 1) / 2 + 2;  // central stencil, accuracy order >= 4
    std::vector<double> offs;
    for (int j = -r; j <= r; ++j) offs.push_back(j);
    auto w = fd_weights(offs, order);
    const double scale = std::pow(static_cast<double>(N), order);
    Field out(N, 0.0);
    for (int i = 0; i < N; ++i) {
        double s = 0.0;
        for (int j = -r; j <= r; ++j) s += w[j + r] * f[((i + j) % N + N) % N];
        out[i] = s * scale;
    }
    return out;
}

const std::vector<std::pair<double, double>>& gauss_legendre16() {
    static const std::vector<std::pair<double, double>> rule = [] {
        const int n = 16;
        std::vector<std::pair<double, double>> r;
        for (int i = 1; i <= n; ++i) {
            double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
            double dp = 0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n * (x * p1 - p0) / (x * x - 1);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r.emplace_back(x, 2.0 / ((1 - x * x) * dp * dp));
        }
        return r;
    }();
    return rule;
}

} // namespace

void Params::validate() const {
    if (!(gamma > 1.0)) throw Error(Errc::BadConfig, "gamma must exceed 1");
    if (n < 1) throw Error(Errc::BadConfig, "n must be >= 1");
    if (!(C0 >= 3.0)) throw Error(Errc::BadConfig, "C0 must be >= 3");
    if (!(epsilon > 0.0 && epsilon < 0.25)) throw Error(Errc::BadConfig, "epsilon must lie in (0, 1/4)");
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Grid::Grid(int n_points) : N(n_points) {
    if (!is_power_of_two(N) || N < 8) throw Error(Errc::BadConfig, "grid size must be a power of two >= 8");
}

Field Grid::nodes() const {
    Field x(N);
    for (int i = 0; i < N; ++i) x[i] = this->x(i);
    return x;
}

void check_finite(const Field& f, const char* what) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) throw Error(Errc::NonFiniteField, std::string(what) + " at index " + std::to_string(i));
}

Field periodic_derivative(const Field& f, int order, DerivMethod method) {
    check_finite(f, "periodic_derivative input");
    if (order < 0) throw Error(Errc::BadConfig, "negative derivative order");
    if (order == 0) return f;
    if (method == DerivMethod::central_fd) return fd_derivative(f, order);
    return spectral_derivative(f, order);
}

std::vector<std::complex<double>> forward_spectrum(const Field& f) {
    const int N = static_cast<int>(f.size());
    const Plan& p = plan_for(N);
    Buffers& b = buffers();
    b.ensure(N);
    std::copy(f.begin(), f.end(), b.real);
    fftw_execute_dft_r2c(p.r2c, b.real, b.spec);
    std::vector<std::complex<double>> out(N / 2 + 1);
    for (int k = 0; k <= N / 2; ++k) out[k] = {b.spec[k][0], b.spec[k][1]};
    return out;
}

Field inverse_spectrum(const std::vector<std::complex<double>>& spec, int N) {
    const Plan& p = plan_for(N);
    Buffers& b = buffers();
    b.ensure(N);
    for (int k = 0; k <= N / 2; ++k) {
        b.spec[k][0] = spec[k].real();
        b.spec[k][1] = spec[k].imag();
    }
    fftw_execute_dft_c2r(p.c2r, b.spec, b.real);
    Field out(b.real, b.real + N);
    for (double& v : out) v /= N;
    return out;
}

void spectral_dx_into(const Field& f, Field& out, bool dealias) {
    const int N = static_cast<int>(f.size());
    const Plan& p = plan_for(N);
    Buffers& b = buffers();
    b.ensure(N);
    std::copy(f.begin(), f.end(), b.real);
    fftw_execute_dft_r2c(p.r2c, b.real, b.spec);
    const double w = kTwoPi / N;
    const int kcut = dealias ? N / 3 : N / 2 - 1;
    for (int k = 0; k <= N / 2; ++k) {
        if (k == 0 || k > kcut) {
            b.spec[k][0] = b.spec[k][1] = 0.0;
            continue;
        }
        const double re = b.spec[k][0], im = b.spec[k][1];
        b.spec[k][0] = -w * k * im;
        b.spec[k][1] = w * k * re;
    }
    fftw_execute_dft_c2r(p.c2r, b.spec, b.real);
    out.resize(N);
    std::copy(b.real, b.real + N, out.begin());
}

Field refine(const Field& f, int M) {
    const int N = static_cast<int>(f.size());
    if (M == N) return f;
    if (M < N || !is_power_of_two(M)) throw Error(Errc::BadConfig, "refine target must be a larger power of two");
    auto s = forward_spectrum(f);
    std::vector<std::complex<double>> t(M / 2 + 1, {0.0, 0.0});
    const double scale = static_cast<double>(M) / N;
    for (int k = 0; k < N / 2; ++k) t[k] = s[k] * scale;
    t[N / 2] = 0.5 * s[N / 2] * scale;
    return inverse_spectrum(t, M);
}

double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

double wrap_torus(double x) {
    double y = x - std::floor(x + 0.5);
    if (y >= 0.5) y -= 1.0;
    return y;
}

MinLoc min_with_location(const Field& f) {
    check_finite(f, "min_with_location input");
    const int N = static_cast<int>(f.size());
    int imin = 0;
    for (int i = 1; i < N; ++i)
        if (f[i] < f[imin]) imin = i;
    const double fm = f[(imin - 1 + N) % N];
    const double f0 = f[imin];
    const double fp = f[(imin + 1) % N];
    const double d = fm - 2.0 * f0 + fp;
    double off = 0.0;
    double val = f0;
    if (d > 0.0) {
        off = 0.5 * (fm - fp) / d;
        val = f0 - 0.25 * (fm - fp) * off;
    }
    MinLoc r;
    r.index = imin;
    r.node_value = f0;
    r.value = val;
    r.x = wrap_torus(-0.5 + (imin + off) / N);
    return r;
}

TrigInterpolant::TrigInterpolant(const Field& f, bool noise_trim) : N_(static_cast<int>(f.size())) {
    check_finite(f, "interpolant input");
    auto s = forward_spectrum(f);
    kmax_ = N_ / 2 - 1;
    if (noise_trim && N_ >= 64) {
        // Roundoff leaves a ragged plateau in the top modes; its maximum over the top quarter
        // of the spectrum sets the noise level.
        double plateau = 0.0;
        for (int k = 3 * N_ / 8; k < N_ / 2; ++k) plateau = std::max(plateau, std::abs(s[k]));
        const double thresh = 10.0 * plateau;
        int last = 0;
        for (int k = 1; k < N_ / 2; ++k)
            if (std::abs(s[k]) > thresh) last = k;
        kmax_ = last;
    }
    c_.resize(kmax_ + 1);
    // Grid nodes start at -1/2, so fold the phase e^{i pi k} into the coefficients.
    for (int k = 0; k <= kmax_; ++k) c_[k] = s[k] / static_cast<double>(N_) * ((k % 2) ? -1.0 : 1.0);
}

std::vector<double> TrigInterpolant::derivatives(double x, int max_order) const {
    std::vector<double> out(max_order + 1, 0.0);
    out[0] = c_.empty() ? 0.0 : c_[0].real();
    const double theta = kTwoPi * x;
    const std::complex<double> rot = std::polar(1.0, theta);
    std::complex<double> e = rot;
    for (int k = 1; k <= kmax_; ++k) {
        if (k % 64 == 0) e = std::polar(1.0, theta * k);
        std::complex<double> term = c_[k] * e;
        const std::complex<double> ik(0.0, kTwoPi * k);
        for (int p = 0; p <= max_order; ++p) {
            out[p] += 2.0 * term.real();
            term *= ik;
        }
        e *= rot;
    }
    return out;
}

double TrigInterpolant::operator()(double x, int order) const { return derivatives(x, order)[order]; }

Field TrigInterpolant::on_grid(int order) const {
    std::vector<std::complex<double>> s(N_ / 2 + 1, {0.0, 0.0});
    for (int k = 0; k <= kmax_; ++k) {
        if (order > 0 && k == 0) continue;
        std::complex<double> v = c_[k] * static_cast<double>(N_) * ((k % 2) ? -1.0 : 1.0);
        s[k] = v * std::pow(std::complex<double>(0.0, kTwoPi * k), order);
    }
    return inverse_spectrum(s, N_);
}

double integrate(const std::function<double(double)>& g, double a, double b, int panels) {
    const auto& rule = gauss_legendre16();
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        double s = 0.0;
        for (const auto& [xi, wi] : rule) s += wi * g(mid + 0.5 * h * xi);
        total += 0.5 * h * s;
    }
    return total;
}

double bracketed_root(const std::function<double(double)>& g, double a, double b, double xtol, int max_iter) {
    double fa = g(a), fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (!std::isfinite(fa) || !std::isfinite(fb) || (fa > 0) == (fb > 0))
        throw Error(Errc::InversionFailed, "root not bracketed");
    int side = 0;
    for (int it = 0; it < max_iter; ++it) {
        double c = b - fb * (b - a) / (fb - fa);
        // Fall back to bisection whenever the secant point is not safely interior.
        if (!(c > std::min(a, b) && c < std::max(a, b)) || it % 8 == 7) c = 0.5 * (a + b);
        const double fc = g(c);
        if (fc == 0.0) return c;
        if ((fc > 0) == (fb > 0)) {
            b = c;
            fb = fc;
            if (side == -1) fa *= 0.5;  // Illinois modification
            side = -1;
        } else {
            a = c;
            fa = fc;
            if (side == +1) fb *= 0.5;
            side = +1;
        }
        if (std::abs(b - a) <= xtol * (1.0 + std::abs(c)))
            return std::abs(fa) < std::abs(fb) ? a : b;
    }
    if (std::abs(b - a) <= 1e3 * xtol * (1.0 + std::abs(a))) return 0.5 * (a + b);
    throw Error(Errc::InversionFailed, "bracketed root did not converge");
}

LocalTaylor::LocalTaylor(int N, double x0, double left, double right, int degree)
    : N_(N), degree_(degree), h_(std::max(left, right)) {
    if (N <= 0 || degree < 0 || !(left >= 0) || !(right >= 0) || !(h_ > 0) || left + right >= 1.0)
        throw Error(Errc::BadConfig, "bad local fit window");
    const double dx = 1.0 / N;
    const int i0 = static_cast<int>(std::floor((wrap_torus(x0) + 0.5) / dx));
    const int r = static_cast<int>(std::ceil(h_ / dx)) + 1;
    // Weights taper to zero at the window edges so the fit, and every derivative taken from it,
    // is continuous in x0. With a hard cutoff a Newton iteration on the derivatives can cycle
    // between stencils.
    std::vector<double> s, sw;
    for (int j = i0 - r; j <= i0 + r; ++j) {
        const double xj = -0.5 + j * dx;
        const double d = wrap_torus(xj - x0);
        const double edge = d < 0 ? left : right;
        if (d != 0.0 && !(std::abs(d) < edge)) continue;
        const double e = d == 0.0 ? 0.0 : d / edge;
        idx_.push_back(((j % N) + N) % N);
        s.push_back(d / h_);
        sw.push_back(1.0 - e * e);
    }
    const int M = static_cast<int>(s.size());
    if (M <= degree) throw Error(Errc::BadConfig, "local fit window holds too few points");
    Eigen::MatrixXd V(M, degree + 1);
    for (int i = 0; i < M; ++i) {
        double v = 1.0;
        for (int c = 0; c <= degree; ++c) {
            V(i, c) = sw[i] * v;
            v *= s[i];
        }
    }
    // Pseudo-inverse Pi R^{-1} Q^T from the thin pivoted QR.
    const int D = degree + 1;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(M, D);
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(D, D).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd X = R.triangularView<Eigen::Upper>().solve(Q.transpose());
    const Eigen::MatrixXd P = qr.colsPermutation() * X;
    rows_.assign(degree + 1, std::vector<double>(M));
    for (int c = 0; c <= degree; ++c)
        for (int i = 0; i < M; ++i) rows_[c][i] = P(c, i) * sw[i];
}

std::vector<double> LocalTaylor::derivatives(const Field& f, int max_order) const {
    if (static_cast<int>(f.size()) != N_) throw Error(Errc::BadConfig, "local fit grid size mismatch");
    if (max_order > degree_) throw Error(Errc::BadConfig, "derivative order exceeds the fit degree");
    std::vector<double> d(max_order + 1);
    double scale = 1.0;
    for (int k = 0; k <= max_order; ++k) {
        if (k > 0) scale *= k / h_;
        double acc = 0.0;
        for (std::size_t i = 0; i < idx_.size(); ++i) acc += rows_[k][i] * f[idx_[i]];
        d[k] = acc * scale;
    }
    return d;
}

} // namespace preshock
