#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "tomocheck/common.hpp"
#include "tomocheck/parallel.hpp"
#include "tomocheck/state_catalog.hpp"
#include "tomocheck/tomogram.hpp"

namespace tomocheck {

/// Grid covering the support of a state: the standard grid widened to the
/// state's support half-width when that is larger.
inline Grid grid_for(const State& state, int n_x = 1024, int n_theta = 64) {
    return Grid::symmetric(std::max(10.0, support_half_width(state)), n_x, n_theta);
}

inline Grid grid_for(const State& a, const State& b, int n_x = 1024, int n_theta = 64) {
    return Grid::symmetric(std::max({10.0, support_half_width(a), support_half_width(b)}), n_x, n_theta);
}

namespace detail {

/// Which representation carries the chirp integral at a given angle.
enum class ChirpRoute { Position, Momentum };

/// Position route for |cot theta| <= 1, momentum route otherwise. Both are
/// the same fractional-Fourier integral; the momentum form is the position
/// form applied to psi~(k) with conjugate pair (p, -q) at theta - pi/2, and it
/// reduces to |psi(X)|^2 exactly at theta = 0.
inline ChirpRoute choose_route(double theta) {
    return std::abs(std::cos(theta)) <= std::abs(std::sin(theta)) ? ChirpRoute::Position : ChirpRoute::Momentum;
}

/// w(X, theta) = |b|/(2 pi) |int f(u) exp(i a u^2/2 - i b X u) du|^2 with
///   position route: f = psi,  a = cot theta,  b = 1/sin theta
///   momentum route: f = psi~, a = -tan theta, b = -1/cos theta
/// evaluated by the trapezoid rule on the state's support, tails trimmed
/// where |f| < 1e-12.
inline std::vector<double> chirp_densities(const PureState& state, double theta, std::span<const double> xs,
                                           ChirpRoute route) {
    double s = std::sin(theta), c = std::cos(theta);
    double a, b;
    if (route == ChirpRoute::Position) {
        a = c / s;
        b = 1.0 / s;
    } else {
        a = -s / c;
        b = -1.0 / c;
    }
    double L = state.support_half_width();
    double x_abs = 0;
    for (double x : xs) x_abs = std::max(x_abs, std::abs(x));
    double h = std::min(0.025, pi / (2.0 * L + std::abs(b) * x_abs + 10.0));
    auto n = static_cast<std::size_t>(std::ceil(2.0 * L / h)) + 1;
    h = 2.0 * L / static_cast<double>(n - 1);

    std::vector<complex> f(n);
    for (std::size_t j = 0; j < n; ++j) {
        double u = -L + h * static_cast<double>(j);
        f[j] = route == ChirpRoute::Position ? state.position(u) : state.momentum(u);
    }
    std::size_t lo = 0, hi = n;
    while (lo < hi && std::abs(f[lo]) < 1e-12) ++lo;
    while (hi > lo && std::abs(f[hi - 1]) < 1e-12) --hi;

    std::vector<double> out(xs.size(), 0.0);
    if (lo == hi) return out;
    std::vector<complex> g(hi - lo);
    for (std::size_t j = lo; j < hi; ++j) {
        double u = -L + h * static_cast<double>(j);
        g[j - lo] = f[j] * std::polar(h, 0.5 * a * u * u);
    }
    double u0 = -L + h * static_cast<double>(lo);
    double pref = std::abs(b) / (2.0 * pi);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double k = b * xs[i];
        complex z = std::polar(1.0, -k * u0);
        const complex step = std::polar(1.0, -k * h);
        complex acc = 0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            acc += g[j] * z;
            z *= step;
        }
        out[i] = pref * std::norm(acc);
    }
    return out;
}

/// Unnormalized row of a pure state at theta in [0, pi).
inline std::vector<double> pure_row(const PureState& state, double theta, std::span<const double> xs) {
    return chirp_densities(state, theta, xs, choose_route(theta));
}

}  // namespace detail

/// Optical tomogram of a pure state or a convex mixture on the grid. Rows are
/// computed independently, certified against the GridTooCoarse threshold and
/// renormalized.
inline Tomogram optical_tomogram(const State& state, Grid grid) {
    grid.validate();
    Tomogram tom;
    tom.grid = std::move(grid);
    tom.source = describe(state);
    tom.values.assign(tom.grid.size() * tom.grid.n_theta(), 0.0);
    const auto xs = tom.grid.xs();
    parallel_for(tom.grid.n_theta(), [&](std::size_t i) {
        auto out = tom.row(i);
        for_each_component(state, [&](double w, const PureState& s) {
            auto r = detail::pure_row(s, tom.grid.thetas[i], xs);
            for (std::size_t k = 0; k < r.size(); ++k) out[k] += w * r[k];
        });
    });
    certify_rows(tom);
    return tom;
}

/// Single-point tomogram value at any angle (reduced with the reflection
/// identity). No renormalization is applied.
inline double tomogram_value(const State& state, double x, double theta) {
    auto [t, flip] = reduce_angle(theta);
    double xv = flip ? -x : x;
    double total = 0;
    for_each_component(state, [&](double w, const PureState& s) {
        total += w * detail::pure_row(s, t, std::span<const double>(&xv, 1))[0];
    });
    return total;
}

}  // namespace tomocheck
