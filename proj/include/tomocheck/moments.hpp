#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "tomocheck/common.hpp"
#include "tomocheck/covariance.hpp"
#include "tomocheck/tomogram.hpp"

namespace tomocheck {

struct MomentTriple {
    double theta = 0;
    double mean = 0;
    double second_moment = 0;
    double variance = 0;
};

struct MomentOptions {
    /// Linear interpolation between neighbouring theta rows.
    bool interpolate = false;
    /// Largest admissible X^2 w mass outside the grid.
    double tail_threshold = 1e-6;
};

/// Estimate of int X^2 w dX beyond both grid ends. Each tail is extrapolated
/// from the log-slope over the last ten cells, which bounds a Gaussian tail
/// from above.
inline double tail_second_moment(const Grid& grid, std::span<const double> row) {
    constexpr std::size_t span_cells = 10;
    const double h = grid.spacing();
    auto one_side = [&](double w_end, double w_in, double x_end) {
        double scale = x_end * x_end + 1.0;
        if (w_end * scale * 100.0 < 1e-15) return 0.0;
        if (!(w_in > w_end)) return std::numeric_limits<double>::infinity();
        double lambda = std::log(w_in / w_end) / (span_cells * h);
        double ax = std::abs(x_end);
        return w_end * (ax * ax / lambda + 2.0 * ax / (lambda * lambda) + 2.0 / (lambda * lambda * lambda));
    };
    std::size_t n = row.size();
    if (n <= span_cells) return 0.0;
    return one_side(row[n - 1], row[n - 1 - span_cells], grid.x_max) +
           one_side(row[0], row[span_cells], grid.x_min);
}

inline MomentTriple row_moments(const Grid& grid, std::span<const double> row, double theta,
                                double tail_threshold = 1e-6) {
    double tail = tail_second_moment(grid, row);
    if (tail > tail_threshold)
        throw Error(ErrorCode::TailMass, "X^2 mass outside the grid estimated at " + format_double(tail) +
                                             " for theta = " + format_double(theta));
    const double h = grid.spacing();
    double m0 = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        double w = (i == 0 || i + 1 == row.size()) ? 0.5 * row[i] : row[i];
        double x = grid.x(i);
        m0 += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    m0 *= h;
    m1 *= h / m0;
    m2 *= h / m0;
    MomentTriple t{theta, m1, m2, m2 - m1 * m1};
    if (t.variance < -1e-9) throw Error(ErrorCode::InvalidArgument, "negative variance");
    t.variance = std::max(t.variance, 0.0);
    return t;
}

/// Mean, second moment and variance of the quadrature at theta.
inline MomentTriple angle_moments(const Tomogram& tom, double theta, const MomentOptions& opt = {}) {
    auto row = resolve_row(tom, theta, opt.interpolate);
    return row_moments(tom.grid, row, theta, opt.tail_threshold);
}

/// Var(theta), Var(theta + pi/2) and the covariance recovered from three
/// variances: cov = Var(theta + pi/4) - Var(theta)/2 - Var(theta + pi/2)/2.
inline RotatedCovariance rotated_covariance(const Tomogram& tom, double theta, const MomentOptions& opt = {}) {
    double v0 = angle_moments(tom, theta, opt).variance;
    double v45 = angle_moments(tom, theta + 0.25 * pi, opt).variance;
    double v90 = angle_moments(tom, theta + 0.5 * pi, opt).variance;
    return {theta, v0, v90, v45 - 0.5 * v0 - 0.5 * v90};
}

}  // namespace tomocheck
