#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tomocheck/common.hpp"
#include "tomocheck/covariance.hpp"
#include "tomocheck/hermite.hpp"

namespace tomocheck {

using complex = std::complex<double>;

// Conventions: hbar = 1, [q, p] = i, q = (a + a^dag)/sqrt(2), vacuum variances
// 1/2, and <q> = sqrt(2) Re(alpha), <p> = sqrt(2) Im(alpha) for coherent states.

struct Fock {
    int n = 0;
};

struct Coherent {
    complex alpha{};
};

/// Displaced squeezed vacuum. The squeezing ellipse is rotated by phi:
/// Var(theta) = e^{-2r}/2 cos^2(theta + phi) + e^{2r}/2 sin^2(theta + phi).
struct Squeezed {
    double r = 0;
    double phi = 0;
    complex alpha{};
};

/// (|alpha> + parity |-alpha>) / N with N^2 = 2 (1 + parity e^{-2|alpha|^2}).
struct Cat {
    complex alpha{};
    int parity = 1;
};

/// sum_n c_n |n>, renormalized on construction.
struct FockSuperposition {
    std::vector<complex> coeffs;
};

using PureSpec = std::variant<Fock, Coherent, Squeezed, Cat, FockSuperposition>;

struct MixtureComponent {
    double weight = 0;
    PureSpec state;
};

struct Mixture {
    std::vector<MixtureComponent> components;
};

using StateSpec = std::variant<Fock, Coherent, Squeezed, Cat, FockSuperposition, Mixture>;

inline StateSpec to_state_spec(const PureSpec& p) {
    return std::visit([](const auto& v) -> StateSpec { return v; }, p);
}

namespace detail {

inline std::string format_complex(complex z) {
    std::string s = format_double(z.real());
    if (z.imag() >= 0 || std::isnan(z.imag())) s += "+";
    return s + format_double(z.imag()) + "i";
}

inline std::string describe_pure(const PureSpec& spec) {
    struct V {
        std::string operator()(const Fock& f) const { return "fock(n=" + std::to_string(f.n) + ")"; }
        std::string operator()(const Coherent& c) const {
            return "coherent(alpha=" + format_complex(c.alpha) + ")";
        }
        std::string operator()(const Squeezed& s) const {
            return "squeezed(r=" + format_double(s.r) + ",phi=" + format_double(s.phi) +
                   ",alpha=" + format_complex(s.alpha) + ")";
        }
        std::string operator()(const Cat& c) const {
            return "cat(alpha=" + format_complex(c.alpha) + ",parity=" + std::to_string(c.parity) + ")";
        }
        std::string operator()(const FockSuperposition& f) const {
            std::string s = "superposition(";
            for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
                if (i) s += ",";
                s += format_complex(f.coeffs[i]);
            }
            return s + ")";
        }
    };
    return std::visit(V{}, spec);
}

/// Normalized Gaussian pure state with means (q0, p0), position variance
/// var_q and symmetrized covariance cov (var_q * var_p - cov^2 = 1/4). Global
/// phase matches D(alpha)|0> for the coherent case.
struct GaussianWave {
    double q0 = 0;
    double p0 = 0;
    double var_q = 0.5;
    double cov = 0;
    complex a{1.0, 0.0};
    double norm = 0;

    GaussianWave() = default;
    GaussianWave(double q0_, double p0_, double var_q_, double cov_)
        : q0(q0_), p0(p0_), var_q(var_q_), cov(cov_),
          a(complex(1.0, -2.0 * cov_) / (2.0 * var_q_)),
          norm(std::pow(2.0 * pi * var_q_, -0.25)) {}

    complex position(double y) const {
        double d = y - q0;
        return norm * std::exp(-0.5 * a * d * d + complex(0.0, p0 * y - 0.5 * q0 * p0));
    }

    /// (2 pi)^{-1/2} int psi(y) e^{-iky} dy in closed form.
    complex momentum(double k) const {
        double d = k - p0;
        return norm / std::sqrt(a) * std::exp(-d * d / (2.0 * a) + complex(0.0, 0.5 * q0 * p0 - k * q0));
    }
};

inline GaussianWave coherent_wave(complex alpha) {
    return GaussianWave(std::sqrt(2.0) * alpha.real(), std::sqrt(2.0) * alpha.imag(), 0.5, 0.0);
}

inline GaussianMoments squeezed_moments(const Squeezed& s) {
    double a = 0.5 * std::exp(-2.0 * s.r);
    double b = 0.5 * std::exp(2.0 * s.r);
    double c = std::cos(s.phi), sn = std::sin(s.phi);
    GaussianMoments m;
    m.mean_q = std::sqrt(2.0) * s.alpha.real();
    m.mean_p = std::sqrt(2.0) * s.alpha.imag();
    m.var_q = a * c * c + b * sn * sn;
    m.var_p = a * sn * sn + b * c * c;
    m.cov = (b - a) * sn * c;
    return m;
}

}  // namespace detail

/// Single-mode pure state with position and momentum wavefunctions. Immutable
/// after construction.
class PureState {
public:
    explicit PureState(PureSpec spec) : spec_(std::move(spec)) {
        std::visit([this](const auto& v) { this->init(v); }, spec_);
        certify_norm();
    }

    const PureSpec& spec() const { return spec_; }
    std::string describe() const { return detail::describe_pure(spec_); }

    /// True when a superposition's coefficients had to be rescaled.
    bool renormalized() const { return renormalized_; }

    /// Largest Fock index with explicit weight (0 for Gaussian families).
    int fock_extent() const { return fock_extent_; }

    complex position(double y) const {
        switch (kind_) {
            case Kind::Fock: return hermite_function(fock_extent_, y);
            case Kind::Gaussian: return gauss_[0].position(y);
            case Kind::Cat: return cat_weights_[0] * gauss_[0].position(y) + cat_weights_[1] * gauss_[1].position(y);
            case Kind::Superposition: {
                auto h = hermite_functions(y, fock_extent_);
                complex s = 0;
                for (std::size_t n = 0; n < coeffs_.size(); ++n) s += coeffs_[n] * h[n];
                return s;
            }
        }
        return 0;
    }

    /// Momentum-space amplitude (2 pi)^{-1/2} int psi(y) e^{-iky} dy.
    complex momentum(double k) const {
        switch (kind_) {
            case Kind::Fock: return minus_i_pow(fock_extent_) * hermite_function(fock_extent_, k);
            case Kind::Gaussian: return gauss_[0].momentum(k);
            case Kind::Cat: return cat_weights_[0] * gauss_[0].momentum(k) + cat_weights_[1] * gauss_[1].momentum(k);
            case Kind::Superposition: {
                auto h = hermite_functions(k, fock_extent_);
                complex s = 0;
                for (std::size_t n = 0; n < coeffs_.size(); ++n) s += coeffs_[n] * minus_i_pow(static_cast<int>(n)) * h[n];
                return s;
            }
        }
        return 0;
    }

    std::vector<complex> wavefunction(std::span<const double> ys) const {
        std::vector<complex> out;
        out.reserve(ys.size());
        for (double y : ys) out.push_back(position(y));
        return out;
    }

    std::optional<GaussianMoments> analytic_moments() const { return moments_; }

    /// Half-width of the q (and p) interval outside which the state is
    /// numerically zero: max(8, sqrt(2 n + 1) + 6 + sqrt(2)|alpha| + 4 e^{|r|}).
    double support_half_width() const {
        return std::max(8.0, std::sqrt(2.0 * fock_extent_ + 1.0) + 6.0 + std::sqrt(2.0) * alpha_abs_ +
                                 4.0 * std::exp(std::abs(squeeze_r_)));
    }

    /// Position-space norm on the support grid, recorded at construction.
    double certified_norm() const { return certified_norm_; }

private:
    enum class Kind { Fock, Gaussian, Cat, Superposition };

    static complex minus_i_pow(int n) {
        switch (n % 4) {
            case 0: return {1, 0};
            case 1: return {0, -1};
            case 2: return {-1, 0};
            default: return {0, 1};
        }
    }

    void init(const Fock& f) {
        if (f.n < 0) throw Error(ErrorCode::NegativePhotonNumber, "Fock n = " + std::to_string(f.n));
        kind_ = Kind::Fock;
        fock_extent_ = f.n;
        double n = f.n + 0.5;
        moments_ = GaussianMoments{0, 0, n, n, 0};
    }

    void init(const Coherent& c) {
        kind_ = Kind::Gaussian;
        gauss_[0] = detail::coherent_wave(c.alpha);
        alpha_abs_ = std::abs(c.alpha);
        moments_ = GaussianMoments{gauss_[0].q0, gauss_[0].p0, 0.5, 0.5, 0.0};
    }

    void init(const Squeezed& s) {
        if (!std::isfinite(s.r) || !std::isfinite(s.phi))
            throw Error(ErrorCode::InvalidArgument, "squeezing parameters must be finite");
        kind_ = Kind::Gaussian;
        auto m = detail::squeezed_moments(s);
        gauss_[0] = detail::GaussianWave(m.mean_q, m.mean_p, m.var_q, m.cov);
        alpha_abs_ = std::abs(s.alpha);
        squeeze_r_ = s.r;
        moments_ = m;
    }

    void init(const Cat& c) {
        if (c.parity != 1 && c.parity != -1) throw Error(ErrorCode::InvalidArgument, "cat parity must be +1 or -1");
        double overlap = std::exp(-2.0 * std::norm(c.alpha));
        double n2 = 2.0 * (1.0 + c.parity * overlap);
        if (n2 < 1e-12) throw Error(ErrorCode::EmptySuperposition, "odd cat state with alpha = 0 vanishes");
        kind_ = Kind::Cat;
        gauss_[0] = detail::coherent_wave(c.alpha);
        gauss_[1] = detail::coherent_wave(-c.alpha);
        double inv = 1.0 / std::sqrt(n2);
        cat_weights_[0] = complex(inv);
        cat_weights_[1] = complex(c.parity * inv);
        alpha_abs_ = std::abs(c.alpha);
    }

    void init(const FockSuperposition& f) {
        if (f.coeffs.empty()) throw Error(ErrorCode::EmptySuperposition, "no coefficients");
        double norm2 = 0;
        for (auto c : f.coeffs) norm2 += std::norm(c);
        if (!(norm2 > 0) || !std::isfinite(norm2))
            throw Error(ErrorCode::EmptySuperposition, "coefficient vector has zero norm");
        double scale = 1.0 / std::sqrt(norm2);
        renormalized_ = std::abs(norm2 - 1.0) > 1e-12;
        coeffs_ = f.coeffs;
        for (auto& c : coeffs_) c *= scale;
        // trailing zeros carry no weight
        while (coeffs_.size() > 1 && coeffs_.back() == complex(0)) coeffs_.pop_back();
        kind_ = Kind::Superposition;
        fock_extent_ = static_cast<int>(coeffs_.size()) - 1;
    }

    void certify_norm() {
        double L = support_half_width();
        double h = 0.01 * std::min(1.0, std::exp(-std::abs(squeeze_r_)));
        auto n = static_cast<std::size_t>(std::ceil(2.0 * L / h)) + 1;
        h = 2.0 * L / static_cast<double>(n - 1);
        std::vector<double> dens(n);
        for (std::size_t i = 0; i < n; ++i) dens[i] = std::norm(position(-L + h * static_cast<double>(i)));
        certified_norm_ = trapezoid(dens, h);
        if (std::abs(certified_norm_ - 1.0) > 1e-9)
            throw Error(ErrorCode::UnnormalizedState,
                        describe() + " has norm " + format_double(certified_norm_) + " on its support");
    }

    PureSpec spec_;
    Kind kind_ = Kind::Fock;
    int fock_extent_ = 0;
    double alpha_abs_ = 0;
    double squeeze_r_ = 0;
    bool renormalized_ = false;
    double certified_norm_ = 0;
    detail::GaussianWave gauss_[2];
    complex cat_weights_[2];
    std::vector<complex> coeffs_;
    std::optional<GaussianMoments> moments_;
};

struct WeightedState {
    double weight;
    PureState state;
};

/// Finite convex mixture of pure states.
class MixedState {
public:
    explicit MixedState(const Mixture& spec) : spec_(spec) {
        if (spec.components.empty()) throw Error(ErrorCode::WeightSumMismatch, "mixture has no components");
        double total = 0;
        for (const auto& c : spec.components) {
            if (!(c.weight > 0.0) || c.weight > 1.0)
                throw Error(ErrorCode::WeightSumMismatch, "weight " + format_double(c.weight) + " outside (0, 1]");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw Error(ErrorCode::WeightSumMismatch, "weights sum to " + format_double(total));
        for (const auto& c : spec.components) components_.push_back({c.weight, PureState(c.state)});
    }

    const Mixture& spec() const { return spec_; }
    std::span<const WeightedState> components() const { return components_; }

    std::string describe() const {
        std::string s = "mixture(";
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (i) s += ",";
            s += format_double(components_[i].weight) + "*" + components_[i].state.describe();
        }
        return s + ")";
    }

    double support_half_width() const {
        double w = 0;
        for (const auto& c : components_) w = std::max(w, c.state.support_half_width());
        return w;
    }

private:
    Mixture spec_;
    std::vector<WeightedState> components_;
};

using State = std::variant<PureState, MixedState>;

inline State make_state(const StateSpec& spec) {
    return std::visit(
        [](const auto& v) -> State {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Mixture>)
                return MixedState(v);
            else
                return PureState(PureSpec(v));
        },
        spec);
}

/// Calls fn(weight, const PureState&) for every pure component.
template <class Fn>
void for_each_component(const State& state, Fn&& fn) {
    if (const auto* p = std::get_if<PureState>(&state)) {
        fn(1.0, *p);
        return;
    }
    for (const auto& c : std::get<MixedState>(state).components()) fn(c.weight, c.state);
}

inline std::string describe(const State& state) {
    return std::visit([](const auto& s) { return s.describe(); }, state);
}

inline double support_half_width(const State& state) {
    return std::visit([](const auto& s) { return s.support_half_width(); }, state);
}

/// Closed-form moments; mixtures combine component means and second moments
/// and then recenter.
inline GaussianMoments analytic_moments(const State& state) {
    double mq = 0, mp = 0, qq = 0, pp = 0, qp = 0;
    bool closed = true;
    for_each_component(state, [&](double w, const PureState& s) {
        auto m = s.analytic_moments();
        if (!m) {
            closed = false;
            return;
        }
        mq += w * m->mean_q;
        mp += w * m->mean_p;
        qq += w * (m->var_q + m->mean_q * m->mean_q);
        pp += w * (m->var_p + m->mean_p * m->mean_p);
        qp += w * (m->cov + m->mean_q * m->mean_p);
    });
    if (!closed) throw Error(ErrorCode::NoClosedForm, describe(state) + " has no closed-form moments");
    if (std::holds_alternative<PureState>(state)) return *std::get<PureState>(state).analytic_moments();
    return GaussianMoments{mq, mp, qq - mq * mq, pp - mp * mp, qp - mq * mp};
}

inline RotatedCovariance analytic_covariance(const State& state) {
    return rotate(analytic_moments(state), 0.0);
}

}  // namespace tomocheck
