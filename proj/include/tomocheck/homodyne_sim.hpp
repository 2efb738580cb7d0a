#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tomocheck/common.hpp"
#include "tomocheck/inequalities.hpp"
#include "tomocheck/moments.hpp"
#include "tomocheck/parallel.hpp"
#include "tomocheck/rng.hpp"
#include "tomocheck/tomogram.hpp"

namespace tomocheck {

struct SampleBatch {
    double theta = 0;
    std::uint64_t seed = 0;
    std::vector<double> values;
};

struct EstimatedMoments {
    MomentTriple moments;
    double se_mean = 0;
    double se_variance = 0;
    std::size_t n = 0;
};

/// Sampler for the piecewise-linear density through the grid values of one
/// row. The cumulative trapezoid selects the cell and the quadratic cell CDF
/// is inverted exactly.
class RowSampler {
public:
    RowSampler(const Grid& grid, std::vector<double> row) : grid_(grid), row_(std::move(row)) {
        const double h = grid_.spacing();
        cdf_.resize(row_.size());
        cdf_[0] = 0.0;
        for (std::size_t i = 1; i < row_.size(); ++i) cdf_[i] = cdf_[i - 1] + 0.5 * h * (row_[i - 1] + row_[i]);
        if (!(cdf_.back() > 0)) throw Error(ErrorCode::InvalidArgument, "row has no probability mass");
    }

    double draw(double u) const {
        const double h = grid_.spacing();
        double target = u * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        std::size_t cell = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
        cell = std::min(cell, row_.size() - 2);
        double w0 = row_[cell], dw = row_[cell + 1] - row_[cell];
        double r = (target - cdf_[cell]) / h;
        // h * (w0 t + dw t^2 / 2) = target - cdf[cell], stable root
        double disc = std::max(0.0, w0 * w0 + 2.0 * dw * r);
        double denom = w0 + std::sqrt(disc);
        double t = denom > 0 ? 2.0 * r / denom : 0.5;
        t = std::clamp(t, 0.0, 1.0);
        return grid_.x(cell) + t * h;
    }

    /// CDF of the piecewise-linear density at x.
    double cdf(double x) const {
        const double h = grid_.spacing();
        if (x <= grid_.x_min) return 0.0;
        if (x >= grid_.x_max) return 1.0;
        auto cell = std::min(static_cast<std::size_t>((x - grid_.x_min) / h), row_.size() - 2);
        double t = (x - grid_.x(cell)) / h;
        double w0 = row_[cell], dw = row_[cell + 1] - row_[cell];
        return (cdf_[cell] + h * (w0 * t + 0.5 * dw * t * t)) / cdf_.back();
    }

private:
    Grid grid_;
    std::vector<double> row_;
    std::vector<double> cdf_;
};

/// n ideal homodyne outcomes at theta; identical inputs give identical batches.
inline SampleBatch sample_quadratures(const Tomogram& tom, double theta, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorCode::EmptyBatch, "requested zero samples");
    RowSampler sampler(tom.grid, resolve_row(tom, theta, false));
    CounterRng rng(seed);
    SampleBatch b{theta, seed, {}};
    b.values.resize(n);
    for (auto& v : b.values) v = sampler.draw(rng.uniform());
    return b;
}

/// Unbiased mean and variance; SE(mean) = s/sqrt(n) and
/// SE(variance) = sqrt((m4 - s^4)/n) by the delta method.
inline EstimatedMoments estimate_moments(const SampleBatch& batch) {
    const std::size_t n = batch.values.size();
    if (n < 2) throw Error(ErrorCode::InsufficientSamples, "need at least two samples");
    double mean = 0;
    for (double v : batch.values) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0, m4 = 0;
    for (double v : batch.values) {
        double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    double var = m2 / static_cast<double>(n - 1);
    m4 /= static_cast<double>(n);
    EstimatedMoments e;
    e.n = n;
    e.moments = {batch.theta, mean, var + mean * mean, var};
    e.se_mean = std::sqrt(var / static_cast<double>(n));
    e.se_variance = std::sqrt(std::max(0.0, m4 - var * var) / static_cast<double>(n));
    return e;
}

/// Kolmogorov-Smirnov statistic of a batch against a CDF.
template <class Cdf>
double ks_statistic(std::span<const double> values, Cdf&& cdf) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double f = cdf(v[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

enum class StatisticalVerdict { Pass, Violation, Inconclusive };

constexpr std::string_view to_string(StatisticalVerdict v) {
    switch (v) {
        case StatisticalVerdict::Pass: return "pass";
        case StatisticalVerdict::Violation: return "violation";
        case StatisticalVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct EmpiricalOptions {
    int bootstrap = 1000;
    double level = 0.95;
    /// Slack below 1/4 still counted as a pass for the CI lower bound.
    double ci_guard = exact_tolerance;
};

struct EmpiricalTrifonovReport {
    InequalityReport report;
    double ci_low = 0;
    double ci_high = 0;
    StatisticalVerdict verdict = StatisticalVerdict::Inconclusive;
    std::size_t n_per_angle = 0;
    std::uint64_t seed = 0;
    int bootstrap = 0;
    /// Estimated moments of the six batches: state 1 at theta, +pi/4, +pi/2,
    /// then state 2.
    std::vector<EstimatedMoments> batches;
};

namespace detail {

inline double unbiased_variance(double sum, double sum_sq, std::size_t n) {
    double nn = static_cast<double>(n);
    return (sum_sq - sum * sum / nn) / (nn - 1.0);
}

inline RotatedCovariance covariance_from_variances(double theta, double v0, double v45, double v90) {
    return {theta, v0, v90, v45 - 0.5 * v0 - 0.5 * v90};
}

/// Linear-interpolation (type 7) quantile of sorted data.
inline double quantile_sorted(std::span<const double> s, double p) {
    double pos = p * static_cast<double>(s.size() - 1);
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= s.size()) return s.back();
    double f = pos - static_cast<double>(i);
    return (1.0 - f) * s[i] + f * s[i + 1];
}

}  // namespace detail

/// Plug-in Trifonov left-hand side from six simulated homodyne batches with a
/// percentile bootstrap confidence interval.
///
/// Batch k (k = 0..5) is drawn with seed CounterRng::derive_key(seed, k);
/// bootstrap replica b resamples all six batches from stream
/// derive_key(seed, 1000 + b). Verdict: violation when the upper CI bound is
/// below 1/4, pass when the lower bound is at least 1/4 - ci_guard,
/// inconclusive otherwise.
inline EmpiricalTrifonovReport empirical_trifonov(const Tomogram& tom1, const Tomogram& tom2, double theta,
                                                  std::size_t n, std::uint64_t seed,
                                                  const EmpiricalOptions& opt = {}) {
    if (n < 2) throw Error(ErrorCode::InsufficientSamples, "need at least two samples per angle");
    if (opt.bootstrap < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least two replicas");
    const double offsets[3] = {0.0, 0.25 * pi, 0.5 * pi};
    std::vector<SampleBatch> batches;
    for (int k = 0; k < 6; ++k) {
        const Tomogram& t = k < 3 ? tom1 : tom2;
        batches.push_back(sample_quadratures(t, theta + offsets[k % 3], n,
                                             CounterRng::derive_key(seed, static_cast<std::uint64_t>(k))));
    }

    EmpiricalTrifonovReport out;
    out.n_per_angle = n;
    out.seed = seed;
    out.bootstrap = opt.bootstrap;
    double var[6];
    for (int k = 0; k < 6; ++k) {
        out.batches.push_back(estimate_moments(batches[static_cast<std::size_t>(k)]));
        var[k] = out.batches.back().moments.variance;
    }
    auto lhs_of = [theta](const double* v) {
        return trifonov_lhs(detail::covariance_from_variances(theta, v[0], v[1], v[2]),
                            detail::covariance_from_variances(theta, v[3], v[4], v[5]));
    };
    double point = lhs_of(var);

    std::vector<double> replicas(static_cast<std::size_t>(opt.bootstrap));
    parallel_for(replicas.size(), [&](std::size_t b) {
        CounterRng rng(CounterRng::derive_key(seed, 1000 + b));
        double v[6];
        for (int k = 0; k < 6; ++k) {
            const auto& xs = batches[static_cast<std::size_t>(k)].values;
            double s = 0, s2 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double x = xs[rng.below(n)];
                s += x;
                s2 += x * x;
            }
            v[k] = detail::unbiased_variance(s, s2, n);
        }
        replicas[b] = lhs_of(v);
    });
    std::sort(replicas.begin(), replicas.end());
    double alpha = 1.0 - opt.level;
    out.ci_low = detail::quantile_sorted(replicas, 0.5 * alpha);
    out.ci_high = detail::quantile_sorted(replicas, 1.0 - 0.5 * alpha);

    if (out.ci_high < uncertainty_bound)
        out.verdict = StatisticalVerdict::Violation;
    else if (out.ci_low >= uncertainty_bound - opt.ci_guard)
        out.verdict = StatisticalVerdict::Pass;
    else
        out.verdict = StatisticalVerdict::Inconclusive;

    out.report = make_report(InequalityKind::Trifonov, theta, point, {tom1.source, tom2.source});
    out.report.pass = out.verdict == StatisticalVerdict::Pass;
    return out;
}

}  // namespace tomocheck
