#pragma once

#include <cmath>

#include "tomocheck/common.hpp"
#include "tomocheck/tomogram.hpp"

namespace tomocheck {

/// Harmonic-oscillator evolution of a tomogram: w_t(X, theta) = w_0(X, theta + t).
/// Rows come from resolve_row with linear interpolation in theta, so t equal
/// to a multiple of the angle spacing reproduces stored rows exactly.
inline Tomogram evolve_harmonic(const Tomogram& tom, double t) {
    if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "evolution time must be finite");
    Tomogram out;
    out.grid = tom.grid;
    out.source = tom.source + " evolved t=" + format_double(t);
    const auto n = static_cast<std::size_t>(tom.grid.n_x);
    out.values.reserve(tom.values.size());
    for (double theta : tom.grid.thetas) {
        auto row = resolve_row(tom, theta + t, true);
        if (row.size() != n) throw Error(ErrorCode::GridMismatch, "resolved row has the wrong length");
        out.values.insert(out.values.end(), row.begin(), row.end());
    }
    out.raw_norms = tom.raw_norms;
    return out;
}

}  // namespace tomocheck
