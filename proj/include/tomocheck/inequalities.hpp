#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tomocheck/common.hpp"
#include "tomocheck/moments.hpp"
#include "tomocheck/tomogram.hpp"

namespace tomocheck {

enum class InequalityKind { Heisenberg, RobertsonSchroedinger, Trifonov };

constexpr std::string_view to_string(InequalityKind k) {
    switch (k) {
        case InequalityKind::Heisenberg: return "Heisenberg";
        case InequalityKind::RobertsonSchroedinger: return "RobertsonSchroedinger";
        case InequalityKind::Trifonov: return "Trifonov";
    }
    return "Unknown";
}

inline constexpr double uncertainty_bound = 0.25;
inline constexpr double exact_tolerance = 1e-6;

struct InequalityReport {
    InequalityKind kind = InequalityKind::Heisenberg;
    double theta = 0;
    double lhs = 0;
    double bound = uncertainty_bound;
    double margin = 0;
    bool pass = false;
    std::vector<std::string> inputs;
};

inline InequalityReport make_report(InequalityKind kind, double theta, double lhs, std::vector<std::string> inputs,
                                    double tolerance = exact_tolerance) {
    InequalityReport r;
    r.kind = kind;
    r.theta = theta;
    r.lhs = lhs;
    r.margin = lhs - r.bound;
    r.pass = r.margin >= -tolerance;
    r.inputs = std::move(inputs);
    return r;
}

/// Var(0) Var(pi/2) >= 1/4.
inline InequalityReport heisenberg_check(const Tomogram& tom, const MomentOptions& opt = {}) {
    double v0 = angle_moments(tom, 0.0, opt).variance;
    double v90 = angle_moments(tom, 0.5 * pi, opt).variance;
    return make_report(InequalityKind::Heisenberg, 0.0, v0 * v90, {tom.source});
}

inline InequalityReport robertson_schrodinger_check(const Tomogram& tom, double theta,
                                                    const MomentOptions& opt = {}) {
    auto r = rotated_covariance(tom, theta, opt);
    return make_report(InequalityKind::RobertsonSchroedinger, theta, r.var_q * r.var_p - r.cov * r.cov,
                       {tom.source});
}

/// State-extended left-hand side. Equal to the Robertson-Schroedinger
/// determinant when both arguments coincide, and symmetric in its arguments.
inline double trifonov_lhs(const RotatedCovariance& a, const RotatedCovariance& b) {
    return 0.5 * (a.var_q * b.var_p + b.var_q * a.var_p) - a.cov * b.cov;
}

inline InequalityReport trifonov_check(const Tomogram& tom1, const Tomogram& tom2, double theta,
                                       const MomentOptions& opt = {}) {
    auto attempt = [&](const Tomogram& t) -> std::optional<RotatedCovariance> {
        try {
            return rotated_covariance(t, theta, opt);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ThetaNotOnGrid) throw;
            return std::nullopt;
        }
    };
    auto r1 = attempt(tom1);
    auto r2 = attempt(tom2);
    if (!r1 && !r2)
        throw Error(ErrorCode::ThetaNotOnGrid, "neither tomogram stores the angles needed at theta = " +
                                                   format_double(theta));
    if (!r1 || !r2)
        throw Error(ErrorCode::GridMismatch, "tomograms disagree on the angles available at theta = " +
                                                 format_double(theta));
    return make_report(InequalityKind::Trifonov, theta, trifonov_lhs(*r1, *r2), {tom1.source, tom2.source});
}

struct TrifonovSweep {
    std::vector<InequalityReport> reports;
    double min_lhs = 0;
    double max_lhs = 0;
};

/// Trifonov left-hand side at every stored angle of tom1.
inline TrifonovSweep trifonov_sweep(const Tomogram& tom1, const Tomogram& tom2, const MomentOptions& opt = {}) {
    TrifonovSweep s;
    for (double theta : tom1.grid.thetas) s.reports.push_back(trifonov_check(tom1, tom2, theta, opt));
    auto [lo, hi] = std::minmax_element(s.reports.begin(), s.reports.end(),
                                        [](const auto& a, const auto& b) { return a.lhs < b.lhs; });
    s.min_lhs = lo->lhs;
    s.max_lhs = hi->lhs;
    return s;
}

}  // namespace tomocheck
