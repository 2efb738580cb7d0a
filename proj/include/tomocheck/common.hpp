#pragma once

#include <charconv>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace tomocheck {

inline constexpr double pi = std::numbers::pi;
inline constexpr std::string_view version = "0.1.0";

enum class ErrorCode {
    InvalidArgument,
    NegativePhotonNumber,
    WeightSumMismatch,
    EmptySuperposition,
    NestedMixture,
    NoClosedForm,
    UnnormalizedState,
    InvalidGrid,
    GridTooCoarse,
    UnsupportedTwoModeFamily,
    InvalidDensityMatrix,
    TruncationLoss,
    InsufficientAngles,
    NonConvergentEta,
    ThetaNotOnGrid,
    TailMass,
    GridMismatch,
    EmptyBatch,
    InsufficientSamples,
    NotStochastic,
    DimensionMismatch,
    NonFactorizedKernel,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NegativePhotonNumber: return "NegativePhotonNumber";
        case ErrorCode::WeightSumMismatch: return "WeightSumMismatch";
        case ErrorCode::EmptySuperposition: return "EmptySuperposition";
        case ErrorCode::NestedMixture: return "NestedMixture";
        case ErrorCode::NoClosedForm: return "NoClosedForm";
        case ErrorCode::UnnormalizedState: return "UnnormalizedState";
        case ErrorCode::InvalidGrid: return "InvalidGrid";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::UnsupportedTwoModeFamily: return "UnsupportedTwoModeFamily";
        case ErrorCode::InvalidDensityMatrix: return "InvalidDensityMatrix";
        case ErrorCode::TruncationLoss: return "TruncationLoss";
        case ErrorCode::InsufficientAngles: return "InsufficientAngles";
        case ErrorCode::NonConvergentEta: return "NonConvergentEta";
        case ErrorCode::ThetaNotOnGrid: return "ThetaNotOnGrid";
        case ErrorCode::TailMass: return "TailMass";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::NotStochastic: return "NotStochastic";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFactorizedKernel: return "NonFactorizedKernel";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Angle reduced onto the stored half range [0, pi). `flipped` is set when the
/// reduction went through w(X, theta + pi) = w(-X, theta).
struct ReducedAngle {
    double theta;
    bool flipped;
};

inline ReducedAngle reduce_angle(double theta) {
    double t = std::fmod(theta, 2.0 * pi);
    if (t < 0) t += 2.0 * pi;
    bool flipped = false;
    if (t >= pi) {
        t -= pi;
        flipped = true;
    }
    // values a rounding error below pi belong to the theta = 0 row
    if (pi - t < 1e-12) {
        t = 0.0;
        flipped = !flipped;
    }
    return {t, flipped};
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Trapezoid rule on a uniform grid.
inline double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

}  // namespace tomocheck
