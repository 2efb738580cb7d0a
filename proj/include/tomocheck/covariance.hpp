#pragma once

#include <cmath>

#include "tomocheck/common.hpp"

namespace tomocheck {

/// First and second moments of (q, p) at theta = 0. `cov` is the symmetrized
/// covariance <(qp + pq)/2> - <q><p>.
struct GaussianMoments {
    double mean_q = 0;
    double mean_p = 0;
    double var_q = 0;
    double var_p = 0;
    double cov = 0;

    double mean_at(double theta) const {
        return std::cos(theta) * mean_q + std::sin(theta) * mean_p;
    }

    /// Variance of X = q cos(theta) + p sin(theta).
    double variance_at(double theta) const {
        double c = std::cos(theta), s = std::sin(theta);
        return c * c * var_q + s * s * var_p + 2.0 * c * s * cov;
    }
};

/// Second-moment payload at angle theta: variance of X_theta, variance of
/// X_{theta + pi/2}, and their covariance.
struct RotatedCovariance {
    double theta = 0;
    double var_q = 0;
    double var_p = 0;
    double cov = 0;

    double determinant() const { return var_q * var_p - cov * cov; }
};

inline RotatedCovariance rotate(const GaussianMoments& m, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    RotatedCovariance r;
    r.theta = theta;
    r.var_q = m.variance_at(theta);
    r.var_p = m.variance_at(theta + 0.5 * pi);
    r.cov = c * s * (m.var_p - m.var_q) + (c * c - s * s) * m.cov;
    return r;
}

}  // namespace tomocheck
