#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace preshock {

// Stable, machine-readable failure codes. The CLI maps each to a fixed exit status.
enum class Errc {
    NonFiniteField = 1,
    VacuumState,
    NoBlowup,
    PastBlowup,
    InversionFailed,
    ProfileConstructionFailed,
    NoBasisNeeded,
    NotInAdmissibleSet,
    NearBlowup,
    MonitorBreach,
    NewtonEscapedBall,
    NewtonStalled,
    FlatnessUndetermined,
    LeftParameterBox,
    ManifoldNewtonStalled,
    OutsideConvergenceBall,
    RadiusUnsettled,
    InconsistentTimes,
    FitDegenerate,
    BadArtifact,
    BadConfig,
};

constexpr std::string_view errc_name(Errc e) {
    switch (e) {
    case Errc::NonFiniteField: return "NonFiniteField";
    case Errc::VacuumState: return "VacuumState";
    case Errc::NoBlowup: return "NoBlowup";
    case Errc::PastBlowup: return "PastBlowup";
    case Errc::InversionFailed: return "InversionFailed";
    case Errc::ProfileConstructionFailed: return "ProfileConstructionFailed";
    case Errc::NoBasisNeeded: return "NoBasisNeeded";
    case Errc::NotInAdmissibleSet: return "NotInAdmissibleSet";
    case Errc::NearBlowup: return "NearBlowup";
    case Errc::MonitorBreach: return "MonitorBreach";
    case Errc::NewtonEscapedBall: return "NewtonEscapedBall";
    case Errc::NewtonStalled: return "NewtonStalled";
    case Errc::FlatnessUndetermined: return "FlatnessUndetermined";
    case Errc::LeftParameterBox: return "LeftParameterBox";
    case Errc::ManifoldNewtonStalled: return "ManifoldNewtonStalled";
    case Errc::OutsideConvergenceBall: return "OutsideConvergenceBall";
    case Errc::RadiusUnsettled: return "RadiusUnsettled";
    case Errc::InconsistentTimes: return "InconsistentTimes";
    case Errc::FitDegenerate: return "FitDegenerate";
    case Errc::BadArtifact: return "BadArtifact";
    case Errc::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

// Short scientific rendering for error messages.
inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code), detail_(detail) {}

    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

} // namespace preshock
