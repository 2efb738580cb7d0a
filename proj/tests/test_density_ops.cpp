#include <gtest/gtest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"
#include "tomocheck/density_ops.hpp"
#include "tomocheck/tomogram_engine.hpp"

using namespace tomocheck;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(DensityOps, CoherentFockAmplitudes) {
    std::complex<double> alpha(0.7, -0.4);
    auto rho = density_from_state(make_state(Coherent{alpha}), 8);
    for (int m = 0; m <= 8; ++m)
        for (int n = 0; n <= 8; ++n) {
            auto cm = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, m) /
                      std::sqrt(boost::math::factorial<double>(static_cast<unsigned>(m)));
            auto cn = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) /
                      std::sqrt(boost::math::factorial<double>(static_cast<unsigned>(n)));
            EXPECT_NEAR(std::abs(rho(m, n) - cm * std::conj(cn)), 0.0, 1e-10);
        }
}

TEST(DensityOps, DisplacementMatchesMatrixExponential) {
    const int dim = 60;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    for (std::complex<double> beta : {std::complex<double>(0.3, 0.0), {0.0, -1.1}, {-0.8, 0.6}}) {
        Eigen::MatrixXcd gen = beta * a.adjoint() - std::conj(beta) * a;
        Eigen::MatrixXcd D = gen.exp();
        for (int m = 0; m < 8; ++m)
            for (int n = 0; n < 8; ++n)
                EXPECT_NEAR(std::abs(displacement_element(m, n, beta) - D(m, n)), 0.0, 1e-10)
                    << beta << " " << m << "," << n;
    }
}

TEST(DensityOps, TomogramFromDensityMatchesEngine) {
    for (const StateSpec& spec : std::vector<StateSpec>{FockSuperposition{{{1, 0}, {0, 0.5}, {0.2, -0.3}}}, Fock{3},
                                                        Mixture{{{0.4, Fock{1}}, {0.6, FockSuperposition{{{1, 0}, {1, 0}}}}}}}) {
        auto s = make_state(spec);
        Grid g = Grid::standard(16);
        auto direct = optical_tomogram(s, g);
        auto via_rho = tomogram_from_density(density_from_state(s, 6), g);
        double err = 0;
        for (std::size_t i = 0; i < direct.values.size(); ++i)
            err = std::max(err, std::abs(direct.values[i] - via_rho.values[i]));
        EXPECT_LT(err, 1e-10) << describe(s);
    }
}

TEST(DensityOps, RoundTripRecoversDensity) {
    for (const StateSpec& spec : std::vector<StateSpec>{
             Fock{0}, Fock{4}, FockSuperposition{{{1, 0}, {0, 1}}},
             FockSuperposition{{{0.5, 0}, {0, 0.5}, {-0.5, 0}, {0, 0}, {0.1, 0.4}}},
             Mixture{{{0.5, Fock{1}}, {0.5, FockSuperposition{{{1, 0}, {0, 0}, {0, 1}}}}}}}) {
        auto s = make_state(spec);
        auto rho = density_from_state(s, 4);
        auto back = density_from_tomogram(optical_tomogram(s, Grid::standard(64)), 4);
        EXPECT_LT(max_abs(back.elements() - rho.elements()), 1e-5) << describe(s);
        EXPECT_LT(back.hermiticity_error(), 1e-14);
    }
}

TEST(DensityOps, ReconstructionGuards) {
    auto vac = optical_tomogram(make_state(Fock{0}), Grid::standard(16));
    EXPECT_EQ(code_of([&] { density_from_tomogram(vac, 3); }), ErrorCode::InsufficientAngles);
    auto tom = optical_tomogram(make_state(Fock{0}), Grid::standard(64));
    ReconstructionOptions opt;
    opt.eta_max = 1.0;
    EXPECT_EQ(code_of([&] { density_from_tomogram(tom, 3, opt); }), ErrorCode::NonConvergentEta);
}

TEST(DensityOps, TruncationLoss) {
    auto rho = density_from_state(make_state(Coherent{{2.0, 0.0}}), 3);
    EXPECT_LT(rho.trace(), 0.5);
    EXPECT_EQ(code_of([&] { tomogram_from_density(rho, Grid::standard(8)); }), ErrorCode::TruncationLoss);
}

TEST(DensityOps, ValidationRejectsUnphysicalMatrices) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    EXPECT_EQ(code_of([&] { DensityMatrix d(m); }), ErrorCode::InvalidDensityMatrix);
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    m(0, 1) = 0.3;
    EXPECT_EQ(code_of([&] { DensityMatrix d(m); }), ErrorCode::InvalidDensityMatrix);
}
