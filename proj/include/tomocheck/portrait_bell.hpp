#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tomocheck/common.hpp"
#include "tomocheck/tomogram.hpp"
#include "tomocheck/two_mode.hpp"

namespace tomocheck {

/// Dichotomic kernel K_{+1/2}(X) = [X >= threshold].
struct SignKernel {
    double threshold = 0;
};

/// Kernel with K_{+1/2}(X) in [0, 1] and K_{-1/2} = 1 - K_{+1/2}.
struct SmoothKernel {
    std::function<double(double)> k_plus;
};

using PortraitKernel = std::variant<SignKernel, SmoothKernel>;

struct FactorizedKernel {
    PortraitKernel mode1;
    PortraitKernel mode2;
};

/// K_{m1 m2}(X1, X2) without product structure; not supported by joint_portrait.
struct NonFactorizedKernel {
    std::function<double(int, int, double, double)> k;
};

using JointKernel = std::variant<FactorizedKernel, NonFactorizedKernel>;

struct QubitDistribution {
    double p_plus = 0;
    double p_minus = 0;
};

/// p(m1, m2) with index 0 for m = +1/2 and 1 for m = -1/2.
struct JointPortrait {
    double theta1 = 0;
    double theta2 = 0;
    std::array<std::array<double, 2>, 2> p{};

    double sum() const { return p[0][0] + p[0][1] + p[1][0] + p[1][1]; }
};

/// Qubit portrait (M P) of a discrete distribution P under a 2 x N column
/// stochastic matrix M.
inline QubitDistribution portrait_discrete(std::span<const double> P, const Eigen::MatrixXd& M) {
    if (M.rows() != 2 || static_cast<std::size_t>(M.cols()) != P.size())
        throw Error(ErrorCode::DimensionMismatch, "stochastic matrix must be 2 x " + std::to_string(P.size()));
    double total = 0;
    for (double p : P) {
        if (!(p >= 0)) throw Error(ErrorCode::NotStochastic, "negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::NotStochastic, "probabilities sum to " + format_double(total));
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
        if (M(0, j) < 0 || M(1, j) < 0 || std::abs(M(0, j) + M(1, j) - 1.0) > 1e-9)
            throw Error(ErrorCode::NotStochastic, "column " + std::to_string(j) + " is not a probability vector");
    }
    QubitDistribution q;
    for (std::size_t j = 0; j < P.size(); ++j) {
        q.p_plus += M(0, static_cast<Eigen::Index>(j)) * P[j];
        q.p_minus += M(1, static_cast<Eigen::Index>(j)) * P[j];
    }
    return q;
}

/// Portrait of one density row. The sign kernel integrates the
/// piecewise-linear density exactly, splitting the cell that holds the
/// threshold.
inline QubitDistribution portrait_row(const Grid& grid, std::span<const double> row, const PortraitKernel& kernel) {
    const double h = grid.spacing();
    double total = trapezoid(row, h);
    double plus = 0;
    if (const auto* sk = std::get_if<SignKernel>(&kernel)) {
        double c = sk->threshold;
        if (c <= grid.x_min) {
            plus = total;
        } else if (c < grid.x_max) {
            auto cell = std::min(static_cast<std::size_t>((c - grid.x_min) / h), row.size() - 2);
            double t = (c - grid.x(cell)) / h;
            double w0 = row[cell], w1 = row[cell + 1];
            double wc = w0 + t * (w1 - w0);
            plus = 0.5 * h * (1.0 - t) * (wc + w1);
            plus += trapezoid(row.subspan(cell + 1), h);
        }
    } else {
        const auto& k = std::get<SmoothKernel>(kernel).k_plus;
        std::vector<double> f(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) f[i] = k(grid.x(i)) * row[i];
        plus = trapezoid(f, h);
    }
    plus = std::clamp(plus / total, 0.0, 1.0);
    return {plus, 1.0 - plus};
}

inline QubitDistribution portrait_continuous(const Tomogram& tom, const PortraitKernel& kernel, double theta,
                                             bool interpolate = false) {
    return portrait_row(tom.grid, resolve_row(tom, theta, interpolate), kernel);
}

/// E = p(++) - p(+-) - p(-+) + p(--).
inline double correlation(const JointPortrait& jp) {
    return jp.p[0][0] - jp.p[0][1] - jp.p[1][0] + jp.p[1][1];
}

namespace detail {

inline double normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Gauss-Legendre nodes/weights on [-1, 1] (Golub-Welsch).
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre_20() {
    static const auto rule = [] {
        constexpr int n = 20;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        std::vector<double> x(n), w(n);
        for (int i = 0; i < n; ++i) {
            x[i] = es.eigenvalues()(i);
            w[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        }
        return std::pair{x, w};
    }();
    return rule;
}

/// Probabilists' Gauss-Hermite rule (weights sum to one), 64 nodes.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_hermite_64() {
    static const auto rule = [] {
        constexpr int n = 64;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        std::vector<double> x(n), w(n);
        for (int i = 0; i < n; ++i) {
            x[i] = es.eigenvalues()(i);
            w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        }
        return std::pair{x, w};
    }();
    return rule;
}

/// P(Z1 >= a, Z2 >= b) for standard normals with correlation rho:
/// int_a^inf phi(z) Q((b - rho z)/sqrt(1 - rho^2)) dz by composite
/// Gauss-Legendre, with the arcsine law at a = b = 0.
inline double standard_orthant(double a, double b, double rho) {
    if (a == 0.0 && b == 0.0) return 0.25 + std::asin(std::clamp(rho, -1.0, 1.0)) / (2.0 * pi);
    if (rho >= 1.0 - 1e-14) return normal_upper(std::max(a, b));
    if (rho <= -1.0 + 1e-14) return std::max(0.0, normal_upper(a) - (1.0 - normal_upper(-b)));
    double lo = std::max(a, -12.0), hi = 12.0;
    if (lo >= hi) return 0.0;
    const auto& [x, w] = gauss_legendre_20();
    const double sr = std::sqrt(1.0 - rho * rho);
    constexpr int panels = 48;
    double width = (hi - lo) / panels, total = 0;
    for (int p = 0; p < panels; ++p) {
        double mid = lo + (p + 0.5) * width;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double z = mid + 0.5 * width * x[i];
            double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * pi);
            total += 0.5 * width * w[i] * phi * normal_upper((b - rho * z) / sr);
        }
    }
    return total;
}

inline double kernel_plus(const PortraitKernel& k, double x) {
    if (const auto* s = std::get_if<SignKernel>(&k)) return x >= s->threshold ? 1.0 : 0.0;
    return std::get<SmoothKernel>(k).k_plus(x);
}

inline JointPortrait assemble(double theta1, double theta2, double p1, double p2, double p12) {
    JointPortrait jp{theta1, theta2, {}};
    jp.p[0][0] = p12;
    jp.p[0][1] = p1 - p12;
    jp.p[1][0] = p2 - p12;
    jp.p[1][1] = 1.0 - p1 - p2 + p12;
    for (auto& r : jp.p)
        for (auto& v : r) v = std::clamp(v, 0.0, 1.0);
    return jp;
}

inline JointPortrait gaussian_joint(const AnalyticGaussian& g, const FactorizedKernel& k, double theta1,
                                    double theta2) {
    Eigen::Vector2d mu = g.mean_at(theta1, theta2);
    Eigen::Matrix2d s = g.covariance_at(theta1, theta2);
    double s1 = std::sqrt(s(0, 0)), s2 = std::sqrt(s(1, 1));
    const auto* k1 = std::get_if<SignKernel>(&k.mode1);
    const auto* k2 = std::get_if<SignKernel>(&k.mode2);
    if (k1 && k2) {
        double a = (k1->threshold - mu(0)) / s1, b = (k2->threshold - mu(1)) / s2;
        double rho = s(0, 1) / (s1 * s2);
        return assemble(theta1, theta2, normal_upper(a), normal_upper(b), standard_orthant(a, b, rho));
    }
    // tensor Gauss-Hermite over the Cholesky factor
    const auto& [z, w] = gauss_hermite_64();
    double l21 = s(0, 1) / s1, l22 = std::sqrt(std::max(0.0, s(1, 1) - l21 * l21));
    double p1 = 0, p2 = 0, p12 = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double x1 = mu(0) + s1 * z[i];
        double k1v = kernel_plus(k.mode1, x1);
        p1 += w[i] * k1v;
        p2 += w[i] * kernel_plus(k.mode2, mu(1) + s2 * z[i]);
        for (std::size_t j = 0; j < z.size(); ++j)
            p12 += w[i] * w[j] * k1v * kernel_plus(k.mode2, mu(1) + l21 * z[i] + l22 * z[j]);
    }
    return assemble(theta1, theta2, p1, p2, p12);
}

}  // namespace detail

/// Joint qubit portrait of a two-mode tomogram at (theta1, theta2). Gridded
/// product mixtures interpolate rows linearly in theta between stored angles.
inline JointPortrait joint_portrait(const TwoModeTomogram& tom, const JointKernel& kernel, double theta1,
                                    double theta2) {
    const auto* fk = std::get_if<FactorizedKernel>(&kernel);
    if (!fk) throw Error(ErrorCode::NonFactorizedKernel, "joint portraits need a factorized kernel");
    if (const auto* g = std::get_if<AnalyticGaussian>(&tom.form)) return detail::gaussian_joint(*g, *fk, theta1, theta2);
    const auto& mix = std::get<GriddedProductMixture>(tom.form);
    JointPortrait jp{theta1, theta2, {}};
    for (const auto& term : mix.terms) {
        auto q1 = portrait_continuous(term.mode1, fk->mode1, theta1, true);
        auto q2 = portrait_continuous(term.mode2, fk->mode2, theta2, true);
        const double a[2] = {q1.p_plus, q1.p_minus}, b[2] = {q2.p_plus, q2.p_minus};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) jp.p[i][j] += term.weight * a[i] * b[j];
    }
    return jp;
}

inline JointPortrait joint_portrait(const TwoModeTomogram& tom, const PortraitKernel& k1, const PortraitKernel& k2,
                                    double theta1, double theta2) {
    return joint_portrait(tom, JointKernel{FactorizedKernel{k1, k2}}, theta1, theta2);
}

/// p_{+1/2}(theta) of one tomogram, tabulated at the stored angles and their
/// pi-shifted reflections, and interpolated linearly in theta. Matches
/// portrait_continuous with interpolation because the portrait is linear in
/// the row.
class PortraitTable {
public:
    PortraitTable(const Tomogram& tom, const PortraitKernel& kernel) : thetas_(tom.grid.thetas) {
        for (std::size_t i = 0; i < thetas_.size(); ++i) {
            direct_.push_back(portrait_row(tom.grid, tom.row(i), kernel).p_plus);
            reflected_.push_back(portrait_row(tom.grid, reflect_row(tom.grid, tom.row(i)), kernel).p_plus);
        }
    }

    double p_plus(double theta) const {
        auto [t, flip] = reduce_angle(theta);
        auto val = [&](std::size_t i, bool f) { return f ? reflected_[i] : direct_[i]; };
        const std::size_t n = thetas_.size();
        if (pi - t <= 1e-9 && thetas_.front() <= 1e-9) return val(0, !flip);
        std::size_t idx = find_theta_in(t);
        if (idx != npos) return val(idx, flip);
        auto upper = std::upper_bound(thetas_.begin(), thetas_.end(), t);
        double lo_t, hi_t, lo_v, hi_v;
        if (upper == thetas_.begin()) {
            lo_t = thetas_[n - 1] - pi;
            lo_v = val(n - 1, !flip);
        } else {
            auto i = static_cast<std::size_t>(upper - thetas_.begin()) - 1;
            lo_t = thetas_[i];
            lo_v = val(i, flip);
        }
        if (upper == thetas_.end()) {
            hi_t = thetas_[0] + pi;
            hi_v = val(0, !flip);
        } else {
            auto i = static_cast<std::size_t>(upper - thetas_.begin());
            hi_t = thetas_[i];
            hi_v = val(i, flip);
        }
        double f = (t - lo_t) / (hi_t - lo_t);
        return (1.0 - f) * lo_v + f * hi_v;
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t find_theta_in(double t) const {
        auto it = std::lower_bound(thetas_.begin(), thetas_.end(), t - 1e-9);
        if (it != thetas_.end() && std::abs(*it - t) <= 1e-9) return static_cast<std::size_t>(it - thetas_.begin());
        return npos;
    }

    std::vector<double> thetas_;
    std::vector<double> direct_;
    std::vector<double> reflected_;
};

struct SearchConfig {
    int grid_points = 16;
    /// Angular step at which coordinate refinement stops.
    double angle_tolerance = 1e-9;
    /// Coarse search over [0, 2 pi) instead of [0, pi).
    bool full_circle = false;
    int max_iterations = 100000;
};

enum class BellVerdict { NoViolation, Violation };

constexpr std::string_view to_string(BellVerdict v) {
    return v == BellVerdict::Violation ? "violation" : "no_violation";
}

inline constexpr double bell_classical_bound = 2.0;
inline constexpr double bell_tolerance = 1e-6;

struct BellResult {
    double B = 0;
    std::array<double, 4> angles{};
    /// E(t1, t2), E(t1, t3), E(t4, t2), E(t4, t3).
    std::array<double, 4> correlations{};
    BellVerdict verdict = BellVerdict::NoViolation;
};

/// Correlation E(theta1, theta2) of a two-mode tomogram under a factorized
/// kernel. Gridded mixtures use per-term portrait tables.
class CorrelationFunction {
public:
    CorrelationFunction(const TwoModeTomogram& tom, FactorizedKernel kernel) : tom_(tom), kernel_(std::move(kernel)) {
        if (const auto* mix = std::get_if<GriddedProductMixture>(&tom.form)) {
            for (const auto& term : mix->terms)
                terms_.push_back({term.weight, PortraitTable(term.mode1, kernel_.mode1),
                                  PortraitTable(term.mode2, kernel_.mode2)});
        }
    }

    double operator()(double theta1, double theta2) const {
        if (terms_.empty()) return correlation(joint_portrait(tom_, JointKernel{kernel_}, theta1, theta2));
        JointPortrait jp{theta1, theta2, {}};
        for (const auto& t : terms_) {
            double a = t.mode1.p_plus(theta1), b = t.mode2.p_plus(theta2);
            jp.p[0][0] += t.weight * a * b;
            jp.p[0][1] += t.weight * a * (1.0 - b);
            jp.p[1][0] += t.weight * (1.0 - a) * b;
            jp.p[1][1] += t.weight * (1.0 - a) * (1.0 - b);
        }
        return correlation(jp);
    }

private:
    struct Term {
        double weight;
        PortraitTable mode1;
        PortraitTable mode2;
    };
    const TwoModeTomogram& tom_;
    FactorizedKernel kernel_;
    std::vector<Term> terms_;
};

/// B(t) = |E(t1,t2) + E(t1,t3) + E(t4,t2) - E(t4,t3)|.
template <class Corr>
BellResult bell_at(const Corr& E, const std::array<double, 4>& t) {
    BellResult r;
    r.angles = t;
    r.correlations = {E(t[0], t[1]), E(t[0], t[2]), E(t[3], t[1]), E(t[3], t[2])};
    r.B = std::abs(r.correlations[0] + r.correlations[1] + r.correlations[2] - r.correlations[3]);
    r.verdict = r.B > bell_classical_bound + bell_tolerance ? BellVerdict::Violation : BellVerdict::NoViolation;
    return r;
}

/// Maximizes the CHSH combination: exhaustive coarse grid (lexicographically
/// first optimum wins ties), then coordinate ascent with a halving step.
/// Deterministic for a fixed configuration.
template <class Corr>
BellResult maximize_bell(const Corr& E, const SearchConfig& cfg = {}) {
    if (cfg.grid_points < 2) throw Error(ErrorCode::InvalidArgument, "grid_points must be at least 2");
    const int G = cfg.grid_points;
    const double range = cfg.full_circle ? 2.0 * pi : pi;
    std::vector<double> a(static_cast<std::size_t>(G));
    for (int i = 0; i < G; ++i) a[static_cast<std::size_t>(i)] = range * i / G;
    std::vector<double> table(static_cast<std::size_t>(G * G));
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) table[static_cast<std::size_t>(i * G + j)] = E(a[i], a[j]);
    auto T = [&](int i, int j) { return table[static_cast<std::size_t>(i * G + j)]; };

    double best = -1;
    std::array<int, 4> bi{};
    for (int i1 = 0; i1 < G; ++i1)
        for (int i2 = 0; i2 < G; ++i2)
            for (int i3 = 0; i3 < G; ++i3)
                for (int i4 = 0; i4 < G; ++i4) {
                    double b = std::abs(T(i1, i2) + T(i1, i3) + T(i4, i2) - T(i4, i3));
                    if (b > best) {
                        best = b;
                        bi = {i1, i2, i3, i4};
                    }
                }

    std::array<double, 4> t{a[bi[0]], a[bi[1]], a[bi[2]], a[bi[3]]};
    auto B = [&](const std::array<double, 4>& x) {
        return std::abs(E(x[0], x[1]) + E(x[0], x[2]) + E(x[3], x[1]) - E(x[3], x[2]));
    };
    double current = B(t);
    double step = range / G;
    for (int it = 0; it < cfg.max_iterations && step > cfg.angle_tolerance; ++it) {
        bool improved = false;
        for (int c = 0; c < 4; ++c) {
            for (double dir : {1.0, -1.0}) {
                auto cand = t;
                cand[static_cast<std::size_t>(c)] += dir * step;
                double v = B(cand);
                if (v > current) {
                    current = v;
                    t = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    for (auto& x : t) {
        x = std::fmod(x, 2.0 * pi);
        if (x < 0) x += 2.0 * pi;
    }
    return bell_at(E, t);
}

inline BellResult bell_number(const TwoModeTomogram& tom, const FactorizedKernel& kernel,
                              const SearchConfig& cfg = {}) {
    CorrelationFunction E(tom, kernel);
    return maximize_bell(E, cfg);
}

}  // namespace tomocheck
