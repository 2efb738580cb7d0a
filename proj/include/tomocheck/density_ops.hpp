#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tomocheck/common.hpp"
#include "tomocheck/hermite.hpp"
#include "tomocheck/parallel.hpp"
#include "tomocheck/state_catalog.hpp"
#include "tomocheck/tomogram.hpp"

namespace tomocheck {

/// Density operator in the truncated Fock basis |0>..|n_max>.
class DensityMatrix {
public:
    /// Checks hermiticity (1e-10), trace <= 1 + 1e-6 and lowest eigenvalue
    /// >= -1e-6 when `validate` is set. Traces below one are allowed here and
    /// rejected by tomogram_from_density as TruncationLoss.
    explicit DensityMatrix(Eigen::MatrixXcd elements, bool validate = true) : rho_(std::move(elements)) {
        if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
            throw Error(ErrorCode::InvalidDensityMatrix, "density matrix must be square and non-empty");
        if (!validate) return;
        if (hermiticity_error() > 1e-10) throw Error(ErrorCode::InvalidDensityMatrix, "matrix is not Hermitian");
        if (trace() > 1.0 + 1e-6) throw Error(ErrorCode::InvalidDensityMatrix, "trace " + format_double(trace()) + " exceeds 1");
        if (min_eigenvalue() < -1e-6)
            throw Error(ErrorCode::InvalidDensityMatrix, "negative eigenvalue " + format_double(min_eigenvalue()));
    }

    static DensityMatrix pure(std::span<const complex> amplitudes) {
        Eigen::VectorXcd v(static_cast<Eigen::Index>(amplitudes.size()));
        for (std::size_t i = 0; i < amplitudes.size(); ++i) v(static_cast<Eigen::Index>(i)) = amplitudes[i];
        return DensityMatrix(v * v.adjoint());
    }

    int n_max() const { return static_cast<int>(rho_.rows()) - 1; }
    const Eigen::MatrixXcd& elements() const { return rho_; }
    complex operator()(int m, int n) const { return rho_(m, n); }

    double trace() const { return rho_.trace().real(); }
    double hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

    double min_eigenvalue() const {
        Eigen::MatrixXcd h = 0.5 * (rho_ + rho_.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

private:
    Eigen::MatrixXcd rho_;
};

/// Fock amplitudes <n|psi>, n = 0..n_max, by projecting the position
/// wavefunction onto Hermite functions.
inline std::vector<complex> fock_amplitudes(const PureState& state, int n_max) {
    double L = std::max(state.support_half_width(), std::sqrt(2.0 * n_max + 1.0) + 8.0);
    double h = 0.01;
    if (const auto* sq = std::get_if<Squeezed>(&state.spec())) h *= std::min(1.0, std::exp(-std::abs(sq->r)));
    auto n = static_cast<std::size_t>(std::ceil(2.0 * L / h)) + 1;
    h = 2.0 * L / static_cast<double>(n - 1);
    std::vector<complex> c(static_cast<std::size_t>(n_max) + 1, 0.0);
    std::vector<double> psi(c.size());
    for (std::size_t j = 0; j < n; ++j) {
        double y = -L + h * static_cast<double>(j);
        double w = (j == 0 || j + 1 == n) ? 0.5 * h : h;
        complex f = state.position(y);
        hermite_functions(y, psi);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += w * psi[k] * f;
    }
    return c;
}

/// Truncated Fock representation of a catalog state (trace may fall below 1).
inline DensityMatrix density_from_state(const State& state, int n_max) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for_each_component(state, [&](double w, const PureState& s) {
        auto c = fock_amplitudes(s, n_max);
        Eigen::Map<Eigen::VectorXcd> v(c.data(), static_cast<Eigen::Index>(c.size()));
        rho += w * v * v.adjoint();
    });
    return DensityMatrix(0.5 * (rho + rho.adjoint()).eval());
}

/// w(X, theta) = sum_{mn} rho_mn <X,theta|m><n|X,theta> with
/// <X,theta|n> = e^{-i n theta} psi_n(X), the phase convention that makes
/// X_theta = q cos(theta) + p sin(theta).
inline Tomogram tomogram_from_density(const DensityMatrix& rho, Grid grid) {
    grid.validate();
    if (rho.trace() < 1.0 - 1e-6)
        throw Error(ErrorCode::TruncationLoss, "represented trace " + format_double(rho.trace()) + " < 1 - 1e-6");
    const int dim = rho.n_max() + 1;
    Tomogram tom;
    tom.grid = std::move(grid);
    tom.source = "density_matrix(n_max=" + std::to_string(rho.n_max()) + ")";
    tom.values.assign(tom.grid.size() * tom.grid.n_theta(), 0.0);

    std::vector<double> psi(tom.grid.size() * static_cast<std::size_t>(dim));
    for (std::size_t k = 0; k < tom.grid.size(); ++k)
        hermite_functions(tom.grid.x(k), std::span<double>(psi.data() + k * dim, static_cast<std::size_t>(dim)));

    const auto& r = rho.elements();
    parallel_for(tom.grid.n_theta(), [&](std::size_t i) {
        double theta = tom.grid.thetas[i];
        std::vector<complex> phase(static_cast<std::size_t>(dim));
        for (int m = 0; m < dim; ++m) phase[static_cast<std::size_t>(m)] = std::polar(1.0, -m * theta);
        auto out = tom.row(i);
        std::vector<complex> a(static_cast<std::size_t>(dim));
        for (std::size_t k = 0; k < tom.grid.size(); ++k) {
            for (int m = 0; m < dim; ++m) a[m] = phase[m] * psi[k * dim + m];
            double w = 0;
            for (int m = 0; m < dim; ++m) {
                complex row_sum = 0;
                for (int n = 0; n < dim; ++n) row_sum += r(m, n) * std::conj(a[n]);
                w += (a[m] * row_sum).real();
            }
            out[k] = w;
        }
    });
    for (std::size_t i = 0; i < tom.grid.n_theta(); ++i) {
        double norm = row_integral(tom.grid, tom.row(i));
        if (std::abs(norm - rho.trace()) > 1e-4)
            throw Error(ErrorCode::GridTooCoarse, "row integral " + format_double(norm) + " vs trace " +
                                                      format_double(rho.trace()));
    }
    certify_rows(tom, 1e-4 + std::abs(rho.trace() - 1.0));
    return tom;
}

/// <m| D(beta) |n> by the associated-Laguerre closed form.
inline complex displacement_element(int m, int n, complex beta) {
    double x = std::norm(beta);
    double env = std::exp(-0.5 * x);
    if (m >= n) {
        double ratio = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
        return ratio * std::pow(beta, m - n) * env *
               std::assoc_laguerre(static_cast<unsigned>(n), static_cast<unsigned>(m - n), x);
    }
    double ratio = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
    return ratio * std::pow(-std::conj(beta), n - m) * env *
           std::assoc_laguerre(static_cast<unsigned>(m), static_cast<unsigned>(n - m), x);
}

struct ReconstructionOptions {
    double eta_max = 12.0;
    int n_eta = 481;
    double tail_tolerance = 1e-6;
};

/// Inverse transform rho_mn = (1/2pi) int_0^pi dtheta int deta int dX
/// w(X,theta) |eta| e^{i eta X} <m| e^{-i eta X_theta} |n>.
///
/// <m| e^{-i eta X_theta} |n> = e^{i(m-n)theta} <m| D(-i eta/sqrt 2) |n>. The
/// eta integral is a trapezoid on [-eta_max, eta_max] with the Euler-Maclaurin
/// correction for the |eta| kink at the origin; the theta integral uses
/// periodic trapezoid weights. The result is symmetrized to be Hermitian.
inline DensityMatrix density_from_tomogram(const Tomogram& tom, int n_max, const ReconstructionOptions& opt = {}) {
    const Grid& g = tom.grid;
    const std::size_t nt = g.n_theta();
    if (nt < 32) throw Error(ErrorCode::InsufficientAngles, std::to_string(nt) + " angles, need at least 32");
    std::vector<double> dtheta(nt);
    double max_gap = 0;
    for (std::size_t i = 0; i < nt; ++i) {
        double next = (i + 1 < nt) ? g.thetas[i + 1] : g.thetas[0] + pi;
        double prev = (i > 0) ? g.thetas[i - 1] : g.thetas[nt - 1] - pi;
        dtheta[i] = 0.5 * (next - prev);
        max_gap = std::max(max_gap, next - g.thetas[i]);
    }
    if (max_gap > pi / 16 + 1e-12)
        throw Error(ErrorCode::InsufficientAngles, "angle gap " + format_double(max_gap) + " exceeds pi/16");
    if (opt.n_eta < 3 || opt.n_eta % 2 == 0)
        throw Error(ErrorCode::InvalidArgument, "n_eta must be odd so that eta = 0 is a node");

    const int dim = n_max + 1;
    const double h_eta = 2.0 * opt.eta_max / (opt.n_eta - 1);
    std::vector<double> etas(static_cast<std::size_t>(opt.n_eta));
    for (int j = 0; j < opt.n_eta; ++j) etas[static_cast<std::size_t>(j)] = -opt.eta_max + h_eta * j;

    // characteristic function F(eta, theta) = int w e^{i eta X} dX per row
    const std::size_t ne = etas.size();
    std::vector<complex> F(nt * ne);
    const double hx = g.spacing();
    parallel_for(nt, [&](std::size_t i) {
        auto row = tom.row(i);
        for (std::size_t j = 0; j < ne; ++j) {
            complex z = std::polar(1.0, etas[j] * g.x_min);
            const complex step = std::polar(1.0, etas[j] * hx);
            complex acc = 0;
            for (std::size_t k = 0; k < row.size(); ++k) {
                double w = (k == 0 || k + 1 == row.size()) ? 0.5 * row[k] : row[k];
                acc += w * z;
                z *= step;
            }
            F[i * ne + j] = acc * hx;
        }
    });

    // displacement elements at theta = 0, d[j][m][n]
    std::vector<complex> d(ne * dim * dim);
    for (std::size_t j = 0; j < ne; ++j) {
        complex beta(0.0, -etas[j] / std::sqrt(2.0));
        for (int m = 0; m < dim; ++m)
            for (int n = 0; n < dim; ++n) d[(j * dim + m) * dim + n] = displacement_element(m, n, beta);
    }

    double tail = 0;
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j : {std::size_t{0}, ne - 1})
            for (int m = 0; m < dim; ++m)
                for (int n = 0; n < dim; ++n)
                    tail = std::max(tail, std::abs(etas[j] * F[i * ne + j] * d[(j * dim + m) * dim + n]));
    if (tail > opt.tail_tolerance)
        throw Error(ErrorCode::NonConvergentEta, "integrand at |eta| = eta_max is " + format_double(tail));

    const std::size_t origin = ne / 2;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
    for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) {
            complex total = 0;
            for (std::size_t i = 0; i < nt; ++i) {
                complex eta_sum = 0;
                for (std::size_t j = 0; j < ne; ++j) {
                    double wj = (j == 0 || j + 1 == ne) ? 0.5 * h_eta : h_eta;
                    eta_sum += wj * std::abs(etas[j]) * F[i * ne + j] * d[(j * dim + m) * dim + n];
                }
                if (m == n) eta_sum += h_eta * h_eta / 6.0 * F[i * ne + origin];
                total += dtheta[i] * std::polar(1.0, (m - n) * g.thetas[i]) * eta_sum;
            }
            rho(m, n) = total / (2.0 * pi);
        }
    }
    return DensityMatrix(0.5 * (rho + rho.adjoint()).eval(), false);
}

}  // namespace tomocheck
