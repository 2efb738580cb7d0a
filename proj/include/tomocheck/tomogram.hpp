#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "tomocheck/common.hpp"

namespace tomocheck {

/// Uniform X grid and sorted angles in [0, pi). Angles outside the half range
/// are reached through w(X, theta + pi) = w(-X, theta).
struct Grid {
    double x_min = -10.0;
    double x_max = 10.0;
    int n_x = 1024;
    std::vector<double> thetas;

    static std::vector<double> uniform_thetas(int n_theta) {
        std::vector<double> t(static_cast<std::size_t>(n_theta));
        for (int k = 0; k < n_theta; ++k) t[static_cast<std::size_t>(k)] = pi * k / n_theta;
        return t;
    }

    /// [-10, 10] with 1024 points and n_theta equally spaced angles.
    static Grid standard(int n_theta = 64) {
        Grid g;
        g.thetas = uniform_thetas(n_theta);
        return g;
    }

    static Grid symmetric(double half_width, int n_x = 1024, int n_theta = 64) {
        Grid g;
        g.x_min = -half_width;
        g.x_max = half_width;
        g.n_x = n_x;
        g.thetas = uniform_thetas(n_theta);
        return g;
    }

    std::size_t n_theta() const { return thetas.size(); }
    std::size_t size() const { return static_cast<std::size_t>(n_x); }
    double spacing() const { return (x_max - x_min) / (n_x - 1); }

    double x(std::size_t i) const {
        if (i + 1 == size()) return x_max;
        return x_min + spacing() * static_cast<double>(i);
    }

    std::vector<double> xs() const {
        std::vector<double> v(size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = x(i);
        return v;
    }

    bool is_symmetric() const { return std::abs(x_min + x_max) <= 1e-12 * std::max(1.0, std::abs(x_max)); }

    /// Reduces every angle into [0, pi), sorts, and drops duplicates.
    void normalize_thetas() {
        for (auto& t : thetas) t = reduce_angle(t).theta;
        std::sort(thetas.begin(), thetas.end());
        thetas.erase(std::unique(thetas.begin(), thetas.end(),
                                 [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                     thetas.end());
    }

    void validate() const {
        if (n_x < 64) throw Error(ErrorCode::InvalidGrid, "n_x must be at least 64");
        if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min))
            throw Error(ErrorCode::InvalidGrid, "x_max must exceed x_min");
        if (thetas.empty()) throw Error(ErrorCode::InvalidGrid, "no angles");
        for (std::size_t i = 0; i < thetas.size(); ++i) {
            if (!(thetas[i] >= 0.0 && thetas[i] < pi))
                throw Error(ErrorCode::InvalidGrid, "angle " + format_double(thetas[i]) + " outside [0, pi)");
            if (i && !(thetas[i] > thetas[i - 1])) throw Error(ErrorCode::InvalidGrid, "angles must be strictly increasing");
        }
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Gridded optical tomogram, values[theta_index * n_x + x_index].
struct Tomogram {
    Grid grid;
    std::vector<double> values;
    std::string source;
    /// Row integrals before the final renormalization.
    std::vector<double> raw_norms;

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * grid.size(), grid.size()};
    }
    std::span<double> row(std::size_t i) { return {values.data() + i * grid.size(), grid.size()}; }

    double at(std::size_t theta_index, std::size_t x_index) const {
        return values[theta_index * grid.size() + x_index];
    }
};

inline double row_integral(const Grid& grid, std::span<const double> row) { return trapezoid(row, grid.spacing()); }

/// Clamps round-off negatives, records raw row integrals, and renormalizes.
/// Throws GridTooCoarse when a raw integral misses 1 by more than
/// `coarse_tolerance`.
inline void certify_rows(Tomogram& tom, double coarse_tolerance = 1e-4) {
    tom.raw_norms.assign(tom.grid.n_theta(), 0.0);
    for (std::size_t i = 0; i < tom.grid.n_theta(); ++i) {
        auto r = tom.row(i);
        for (double& v : r) {
            if (v < -1e-12)
                throw Error(ErrorCode::GridTooCoarse, "negative density " + format_double(v) + " at theta index " +
                                                          std::to_string(i));
            v = std::max(v, 0.0);
        }
        double norm = row_integral(tom.grid, r);
        tom.raw_norms[i] = norm;
        if (!(std::abs(norm - 1.0) <= coarse_tolerance))
            throw Error(ErrorCode::GridTooCoarse, "row " + std::to_string(i) + " integrates to " + format_double(norm));
        for (double& v : r) v /= norm;
    }
}

/// Checks an externally supplied tomogram against the density invariants
/// without rescaling beyond clamping.
inline void validate_tomogram(Tomogram& tom, double norm_tolerance = 1e-6) {
    tom.grid.validate();
    if (tom.values.size() != tom.grid.size() * tom.grid.n_theta())
        throw Error(ErrorCode::DimensionMismatch, "tomogram value count does not match grid");
    tom.raw_norms.assign(tom.grid.n_theta(), 0.0);
    for (std::size_t i = 0; i < tom.grid.n_theta(); ++i) {
        auto r = tom.row(i);
        for (double& v : r) {
            if (!(v >= -1e-12)) throw Error(ErrorCode::InvalidArgument, "negative or non-finite density");
            v = std::max(v, 0.0);
        }
        tom.raw_norms[i] = row_integral(tom.grid, r);
        if (std::abs(tom.raw_norms[i] - 1.0) > norm_tolerance)
            throw Error(ErrorCode::InvalidArgument,
                        "row " + std::to_string(i) + " integrates to " + format_double(tom.raw_norms[i]));
    }
}

/// Row sampled at -X, i.e. the row of theta + pi.
inline std::vector<double> reflect_row(const Grid& grid, std::span<const double> row) {
    std::vector<double> out(row.begin(), row.end());
    if (grid.is_symmetric()) {
        std::reverse(out.begin(), out.end());
        return out;
    }
    double h = grid.spacing();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double pos = (-grid.x(i) - grid.x_min) / h;
        if (pos < 0.0 || pos > static_cast<double>(grid.size() - 1)) {
            out[i] = 0.0;
            continue;
        }
        auto j = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
        double f = pos - static_cast<double>(j);
        out[i] = (1.0 - f) * row[j] + f * row[j + 1];
    }
    return out;
}

/// Index of a stored angle within 1e-9 of the reduced angle, or npos.
inline std::size_t find_theta(const Grid& grid, double reduced_theta) {
    constexpr double tol = 1e-9;
    auto it = std::lower_bound(grid.thetas.begin(), grid.thetas.end(), reduced_theta - tol);
    if (it != grid.thetas.end() && std::abs(*it - reduced_theta) <= tol)
        return static_cast<std::size_t>(it - grid.thetas.begin());
    return static_cast<std::size_t>(-1);
}

/// Density row at an arbitrary angle. Stored rows are used directly (with the
/// reflection identity outside [0, pi)); otherwise rows are blended linearly in
/// theta when `interpolate` is set and ThetaNotOnGrid is thrown when not.
inline std::vector<double> resolve_row(const Tomogram& tom, double theta, bool interpolate = false) {
    const Grid& g = tom.grid;
    auto [t, flip] = reduce_angle(theta);
    // angles just below pi coincide with the reflected theta = 0 row
    if (pi - t <= 1e-9 && !g.thetas.empty() && g.thetas.front() <= 1e-9) {
        t = 0.0;
        flip = !flip;
    }
    auto oriented = [&](std::vector<double> r) { return flip ? reflect_row(g, r) : r; };

    std::size_t idx = find_theta(g, t);
    if (idx != static_cast<std::size_t>(-1)) {
        auto r = tom.row(idx);
        return oriented(std::vector<double>(r.begin(), r.end()));
    }
    if (!interpolate)
        throw Error(ErrorCode::ThetaNotOnGrid, "angle " + format_double(theta) + " is not a stored tomogram angle");

    auto upper = std::upper_bound(g.thetas.begin(), g.thetas.end(), t);
    std::vector<double> lo_row, hi_row;
    double lo_theta, hi_theta;
    if (upper == g.thetas.begin()) {
        std::size_t last = g.n_theta() - 1;
        lo_row = reflect_row(g, tom.row(last));
        lo_theta = g.thetas[last] - pi;
    } else {
        auto i = static_cast<std::size_t>(upper - g.thetas.begin()) - 1;
        auto r = tom.row(i);
        lo_row.assign(r.begin(), r.end());
        lo_theta = g.thetas[i];
    }
    if (upper == g.thetas.end()) {
        hi_row = reflect_row(g, tom.row(0));
        hi_theta = g.thetas[0] + pi;
    } else {
        auto i = static_cast<std::size_t>(upper - g.thetas.begin());
        auto r = tom.row(i);
        hi_row.assign(r.begin(), r.end());
        hi_theta = g.thetas[i];
    }
    double f = (t - lo_theta) / (hi_theta - lo_theta);
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - f) * lo_row[i] + f * hi_row[i];
    return oriented(std::move(out));
}

}  // namespace tomocheck
