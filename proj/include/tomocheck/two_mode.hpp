#pragma once

#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tomocheck/common.hpp"
#include "tomocheck/state_catalog.hpp"
#include "tomocheck/tomogram.hpp"
#include "tomocheck/tomogram_engine.hpp"

namespace tomocheck {

struct ProductSpec {
    StateSpec mode1;
    StateSpec mode2;
};

struct SeparableComponent {
    double weight = 0;
    StateSpec mode1;
    StateSpec mode2;
};

struct SeparableMixtureSpec {
    std::vector<SeparableComponent> components;
};

struct TwoModeSqueezedVacuum {
    double r = 0;
};

using TwoModeStateSpec = std::variant<ProductSpec, SeparableMixtureSpec, TwoModeSqueezedVacuum>;

/// Two-mode Gaussian tomogram from phase-space means (q1, p1, q2, p2) and the
/// symmetrized 4x4 covariance matrix. The quadrature pair (X1(theta1),
/// X2(theta2)) is bivariate normal.
struct AnalyticGaussian {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d cov = 0.5 * Eigen::Matrix4d::Identity();

    static Eigen::Vector2d direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

    Eigen::Vector2d mean_at(double theta1, double theta2) const {
        return {direction(theta1).dot(mean.head<2>()), direction(theta2).dot(mean.tail<2>())};
    }

    Eigen::Matrix2d covariance_at(double theta1, double theta2) const {
        Eigen::Vector2d u1 = direction(theta1), u2 = direction(theta2);
        Eigen::Matrix2d s;
        s(0, 0) = u1.dot(cov.block<2, 2>(0, 0) * u1);
        s(1, 1) = u2.dot(cov.block<2, 2>(2, 2) * u2);
        s(0, 1) = s(1, 0) = u1.dot(cov.block<2, 2>(0, 2) * u2);
        return s;
    }

    double density(double x1, double x2, double theta1, double theta2) const {
        Eigen::Vector2d d = Eigen::Vector2d(x1, x2) - mean_at(theta1, theta2);
        Eigen::Matrix2d s = covariance_at(theta1, theta2);
        double det = s.determinant();
        return std::exp(-0.5 * d.dot(s.inverse() * d)) / (2.0 * pi * std::sqrt(det));
    }

    /// Physicality (V + i Omega / 2 >= 0) and positive-definite projected
    /// covariances at an 8 x 8 set of validation angles.
    void validate() const {
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw Error(ErrorCode::InvalidArgument, "two-mode covariance is not symmetric");
        Eigen::Matrix4cd m = cov.cast<std::complex<double>>();
        const std::complex<double> half_i(0.0, 0.5);
        for (int k = 0; k < 2; ++k) {
            m(2 * k, 2 * k + 1) += half_i;
            m(2 * k + 1, 2 * k) -= half_i;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw Error(ErrorCode::InvalidArgument, "two-mode covariance violates the uncertainty principle");
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                Eigen::Matrix2d s = covariance_at(pi * i / 8, pi * j / 8);
                if (!(s(0, 0) > 0 && s.determinant() > 0))
                    throw Error(ErrorCode::InvalidArgument, "projected covariance is not positive definite");
            }
    }
};

struct ProductTerm {
    double weight = 0;
    Tomogram mode1;
    Tomogram mode2;
};

/// Convex sum of products of single-mode tomograms.
struct GriddedProductMixture {
    std::vector<ProductTerm> terms;
};

struct TwoModeTomogram {
    std::variant<AnalyticGaussian, GriddedProductMixture> form;
    std::string source;
};

/// Zero mean, Var1 = Var2 = cosh(2r)/2, Cov(theta1, theta2) = sinh(2r)/2 cos(theta1 + theta2).
inline AnalyticGaussian two_mode_squeezed_vacuum(double r) {
    AnalyticGaussian g;
    double c = 0.5 * std::cosh(2.0 * r), s = 0.5 * std::sinh(2.0 * r);
    g.cov = c * Eigen::Matrix4d::Identity();
    g.cov(0, 2) = g.cov(2, 0) = s;
    g.cov(1, 3) = g.cov(3, 1) = -s;
    return g;
}

inline double mode_support(const StateSpec& s) { return support_half_width(make_state(s)); }

/// Grid wide enough for every mode appearing in a separable spec.
inline Grid grid_for(const TwoModeStateSpec& spec, int n_x = 1024, int n_theta = 64) {
    double half = 10.0;
    if (const auto* p = std::get_if<ProductSpec>(&spec)) {
        half = std::max({half, mode_support(p->mode1), mode_support(p->mode2)});
    } else if (const auto* m = std::get_if<SeparableMixtureSpec>(&spec)) {
        for (const auto& c : m->components) half = std::max({half, mode_support(c.mode1), mode_support(c.mode2)});
    }
    return Grid::symmetric(half, n_x, n_theta);
}

inline TwoModeTomogram separable_mixture_tomogram(const std::vector<SeparableComponent>& components,
                                                  const Grid& grid) {
    if (components.empty()) throw Error(ErrorCode::WeightSumMismatch, "separable mixture has no components");
    double total = 0;
    for (const auto& c : components) {
        if (!(c.weight > 0.0)) throw Error(ErrorCode::WeightSumMismatch, "weights must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw Error(ErrorCode::WeightSumMismatch, "weights sum to " + format_double(total));
    GriddedProductMixture mix;
    std::string source = "separable(";
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        auto s1 = make_state(c.mode1);
        auto s2 = make_state(c.mode2);
        mix.terms.push_back({c.weight, optical_tomogram(s1, grid), optical_tomogram(s2, grid)});
        if (k) source += ",";
        source += format_double(c.weight) + "*" + describe(s1) + "x" + describe(s2);
    }
    return {std::move(mix), source + ")"};
}

inline TwoModeTomogram two_mode_tomogram(const TwoModeStateSpec& spec, const Grid& grid) {
    struct V {
        const Grid& grid;
        TwoModeTomogram operator()(const ProductSpec& p) const {
            auto t = separable_mixture_tomogram({{1.0, p.mode1, p.mode2}}, grid);
            t.source = "product(" + describe(make_state(p.mode1)) + "," + describe(make_state(p.mode2)) + ")";
            return t;
        }
        TwoModeTomogram operator()(const SeparableMixtureSpec& m) const {
            return separable_mixture_tomogram(m.components, grid);
        }
        TwoModeTomogram operator()(const TwoModeSqueezedVacuum& t) const {
            if (!std::isfinite(t.r)) throw Error(ErrorCode::InvalidArgument, "squeezing must be finite");
            auto g = two_mode_squeezed_vacuum(t.r);
            g.validate();
            return {g, "tmsv(r=" + format_double(t.r) + ")"};
        }
    };
    return std::visit(V{grid}, spec);
}

inline TwoModeTomogram two_mode_tomogram(const TwoModeStateSpec& spec) {
    return two_mode_tomogram(spec, grid_for(spec));
}

}  // namespace tomocheck
