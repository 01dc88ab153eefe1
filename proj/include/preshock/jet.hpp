#pragma once

#include <cmath>
#include <vector>

namespace preshock {

// Truncated Taylor series c[0] + c[1] h + ... + c[K] h^K about a point.
// Used to evaluate closed-form profiles together with all their derivatives.
struct Jet {
    std::vector<double> c;

    Jet() = default;
    explicit Jet(int order, double value = 0.0) : c(order + 1, 0.0) { c[0] = value; }

    static Jet variable(int order, double x0, double slope = 1.0) {
        Jet j(order, x0);
        if (order >= 1) j.c[1] = slope;
        return j;
    }

    int order() const { return static_cast<int>(c.size()) - 1; }
    double value() const { return c[0]; }

    // p-th derivative at the expansion point.
    double derivative(int p) const {
        double f = 1.0;
        for (int i = 2; i <= p; ++i) f *= i;
        return c[p] * f;
    }

    Jet& operator+=(const Jet& o) {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
        return *this;
    }
    Jet& operator*=(double s) {
        for (double& v : c) v *= s;
        return *this;
    }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator+(Jet a, double s) {
    a.c[0] += s;
    return a;
}
inline Jet operator+(double s, Jet a) { return a + s; }
inline Jet operator-(double s, const Jet& a) {
    Jet r = a * -1.0;
    r.c[0] += s;
    return r;
}
inline Jet operator-(const Jet& a) { return a * -1.0; }

inline Jet operator*(const Jet& a, const Jet& b) {
    const int K = a.order();
    Jet r(K);
    for (int k = 0; k <= K; ++k) {
        double s = 0.0;
        for (int j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
        r.c[k] = s;
    }
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
    const int K = a.order();
    Jet q(K);
    for (int k = 0; k <= K; ++k) {
        double s = a.c[k];
        for (int j = 1; j <= k; ++j) s -= b.c[j] * q.c[k - j];
        q.c[k] = s / b.c[0];
    }
    return q;
}

inline Jet exp(const Jet& a) {
    const int K = a.order();
    Jet e(K, std::exp(a.c[0]));
    for (int k = 1; k <= K; ++k) {
        double s = 0.0;
        for (int j = 1; j <= k; ++j) s += j * a.c[j] * e.c[k - j];
        e.c[k] = s / k;
    }
    return e;
}

// Simultaneous sine and cosine of a jet.
inline void sincos(const Jet& a, Jet& s, Jet& co) {
    const int K = a.order();
    s = Jet(K, std::sin(a.c[0]));
    co = Jet(K, std::cos(a.c[0]));
    for (int k = 1; k <= K; ++k) {
        double ss = 0.0, cc = 0.0;
        for (int j = 1; j <= k; ++j) {
            ss += j * a.c[j] * co.c[k - j];
            cc -= j * a.c[j] * s.c[k - j];
        }
        s.c[k] = ss / k;
        co.c[k] = cc / k;
    }
}

inline Jet cos(const Jet& a) {
    Jet s, c;
    sincos(a, s, c);
    return c;
}

inline Jet pow(const Jet& a, int p) {
    Jet r(a.order(), 1.0);
    for (int i = 0; i < p; ++i) r = r * a;
    return r;
}

} // namespace preshock
