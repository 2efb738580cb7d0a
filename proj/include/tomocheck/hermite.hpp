#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tomocheck/common.hpp"

namespace tomocheck {

/// Normalized Hermite functions psi_0..psi_{n_max} at x, written into out
/// (size n_max + 1). Uses the three-term recurrence on the normalized
/// functions directly, so no factorials or H_n(x) values are formed:
///   psi_{k+1} = sqrt(2/(k+1)) x psi_k - sqrt(k/(k+1)) psi_{k-1}.
inline void hermite_functions(double x, std::span<double> out) {
    if (out.empty()) return;
    out[0] = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    if (out.size() == 1) return;
    out[1] = std::sqrt(2.0) * x * out[0];
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        double kd = static_cast<double>(k);
        out[k + 1] = std::sqrt(2.0 / (kd + 1.0)) * x * out[k] - std::sqrt(kd / (kd + 1.0)) * out[k - 1];
    }
}

inline std::vector<double> hermite_functions(double x, int n_max) {
    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    hermite_functions(x, out);
    return out;
}

inline double hermite_function(int n, double x) {
    return hermite_functions(x, n).back();
}

}  // namespace tomocheck
