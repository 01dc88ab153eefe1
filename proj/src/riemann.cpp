#include "preshock/riemann.hpp"

#include <string>

namespace preshock {

namespace {

void require_same_size(std::size_t a, std::size_t b, std::size_t c) {
    if (a != b || a != c) throw Error(Errc::BadConfig, "field lengths differ");
}

} // namespace

RiemannState to_riemann(const PhysicalState& p) {
    require_same_size(p.u.size(), p.sigma.size(), p.S.size());
    RiemannState r{Field(p.u.size()), Field(p.u.size()), p.S};
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        if (!(p.sigma[i] > 0.0)) throw Error(Errc::VacuumState, "sigma <= 0 at index " + std::to_string(i));
        r.w[i] = p.u[i] + p.sigma[i];
        r.z[i] = p.u[i] - p.sigma[i];
    }
    return r;
}

PhysicalState to_physical(const RiemannState& r) {
    require_same_size(r.w.size(), r.z.size(), r.k.size());
    PhysicalState p{Field(r.w.size()), Field(r.w.size()), r.k};
    for (std::size_t i = 0; i < r.w.size(); ++i) {
        if (!(r.w[i] - r.z[i] > 0.0)) throw Error(Errc::VacuumState, "w - z <= 0 at index " + std::to_string(i));
        p.u[i] = 0.5 * (r.w[i] + r.z[i]);
        p.sigma[i] = 0.5 * (r.w[i] - r.z[i]);
    }
    return p;
}

WaveSpeeds wave_speeds(double w, double z, double alpha) {
    return {0.5 * (1.0 - alpha) * w + 0.5 * (1.0 + alpha) * z, 0.5 * (w + z),
            0.5 * (1.0 + alpha) * w + 0.5 * (1.0 - alpha) * z};
}

DiffRiemannState differentiate_riemann(const RiemannState& r, const Params& params, DerivMethod method) {
    require_same_size(r.w.size(), r.z.size(), r.k.size());
    const Field wy = periodic_derivative(r.w, 1, method);
    const Field zy = periodic_derivative(r.z, 1, method);
    const Field ky = periodic_derivative(r.k, 1, method);
    const double c = 1.0 / (2.0 * params.gamma);
    DiffRiemannState d{Field(r.w.size()), Field(r.w.size()), ky};
    for (std::size_t i = 0; i < r.w.size(); ++i) {
        const double sigma = 0.5 * (r.w[i] - r.z[i]);
        if (!(sigma > 0.0)) throw Error(Errc::VacuumState, "w - z <= 0 at index " + std::to_string(i));
        d.wring[i] = wy[i] - c * sigma * ky[i];
        d.zring[i] = zy[i] + c * sigma * ky[i];
    }
    return d;
}

} // namespace preshock
