#pragma once

#include "preshock/core.hpp"

namespace preshock {

struct PhysicalState {
    Field u, sigma, S;
};

struct RiemannState {
    Field w, z, k;
};

struct DiffRiemannState {
    Field wring, zring, kring;
};

struct WaveSpeeds {
    double lambda1, lambda2, lambda3;
};

RiemannState to_riemann(const PhysicalState& p);
PhysicalState to_physical(const RiemannState& r);

WaveSpeeds wave_speeds(double w, double z, double alpha);

// Entropy-corrected derivatives of (w, z, k) with respect to the grid variable.
DiffRiemannState differentiate_riemann(const RiemannState& r, const Params& params,
                                       DerivMethod method = DerivMethod::spectral);

} // namespace preshock
