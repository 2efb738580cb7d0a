#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tomocheck/tomogram_engine.hpp"

using namespace tomocheck;

namespace {

double max_row_error(const Tomogram& tom, const std::function<double(double, double)>& exact) {
    double err = 0;
    for (std::size_t i = 0; i < tom.grid.n_theta(); ++i)
        for (std::size_t k = 0; k < tom.grid.size(); ++k)
            err = std::max(err, std::abs(tom.at(i, k) - exact(tom.grid.x(k), tom.grid.thetas[i])));
    return err;
}

}  // namespace

TEST(TomogramEngine, CoherentIsShiftedGaussian) {
    std::complex<double> alpha(0.8, -0.6);
    auto tom = optical_tomogram(make_state(Coherent{alpha}), Grid::standard(32));
    double err = max_row_error(tom, [&](double x, double th) {
        double mean = std::sqrt(2.0) * (alpha * std::exp(std::complex<double>(0, -th))).real();
        return oracle::normal_pdf(x, mean, 0.5);
    });
    EXPECT_LT(err, 1e-10);
}

TEST(TomogramEngine, SqueezedVarianceFollowsEllipse) {
    const double r = 0.7, phi = 0.3;
    auto state = make_state(Squeezed{r, phi, {0.4, 0.1}});
    auto tom = optical_tomogram(state, grid_for(state, 1024, 24));
    auto m = analytic_moments(state);
    double err = max_row_error(tom, [&](double x, double th) {
        double v = std::exp(-2 * r) / 2 * std::pow(std::cos(th + phi), 2) + std::exp(2 * r) / 2 * std::pow(std::sin(th + phi), 2);
        return oracle::normal_pdf(x, m.mean_at(th), v);
    });
    EXPECT_LT(err, 1e-10);
}

TEST(TomogramEngine, FockTomogramIsAngleIndependent) {
    for (unsigned n : {0u, 1u, 4u, 9u}) {
        auto tom = optical_tomogram(make_state(Fock{static_cast<int>(n)}), Grid::standard(16));
        double err = max_row_error(tom, [n](double x, double) { return std::pow(oracle::fock_wavefunction(n, x), 2); });
        EXPECT_LT(err, 1e-10) << n;
    }
}

TEST(TomogramEngine, SuperpositionInterference) {
    // (|0> + i|1>)/sqrt(2): w = (psi0^2 + psi1^2)/2 + psi0 psi1 sin(theta)
    auto tom = optical_tomogram(make_state(FockSuperposition{{{1, 0}, {0, 1}}}), Grid::standard(32));
    double err = max_row_error(tom, [](double x, double th) {
        double a = oracle::fock_wavefunction(0, x), b = oracle::fock_wavefunction(1, x);
        return 0.5 * (a * a + b * b) + a * b * std::sin(th);
    });
    EXPECT_LT(err, 1e-10);
}

TEST(TomogramEngine, RowsAreNormalizedAndNonnegative) {
    for (const StateSpec& spec : std::vector<StateSpec>{Cat{{2, 0.5}, 1}, Cat{{1, 0}, -1}, Squeezed{1.0, 0.0, {}},
                                                        Mixture{{{0.3, Fock{2}}, {0.7, Coherent{{1, 1}}}}}}) {
        auto s = make_state(spec);
        auto tom = optical_tomogram(s, grid_for(s, 1024, 32));
        for (std::size_t i = 0; i < tom.grid.n_theta(); ++i) {
            EXPECT_NEAR(row_integral(tom.grid, tom.row(i)), 1.0, 1e-12);
            EXPECT_NEAR(tom.raw_norms[i], 1.0, 1e-6) << describe(s);
            for (double v : tom.row(i)) EXPECT_GE(v, 0.0);
        }
    }
}

TEST(TomogramEngine, ReflectionSymmetry) {
    auto s = make_state(Cat{{1.3, 0.4}, -1});
    for (double th : {0.1, 0.9, 1.7, 2.9})
        for (double x : {-1.2, 0.0, 0.4, 2.2})
            EXPECT_NEAR(tomogram_value(s, x, th + pi), tomogram_value(s, -x, th), 1e-12);
}

TEST(TomogramEngine, ContinuousAcrossRouteSwitch) {
    auto s = make_state(Squeezed{0.5, 0.2, {0.5, -1.0}});
    for (double th : {pi / 4, 3 * pi / 4, 1e-7, pi - 1e-7})
        for (double x : {-1.0, 0.3, 1.5}) {
            double lo = tomogram_value(s, x, th - 1e-9), hi = tomogram_value(s, x, th + 1e-9);
            EXPECT_NEAR(lo, hi, 1e-7) << th;
        }
}

TEST(TomogramEngine, MixtureIsWeightedSum) {
    Grid g = Grid::standard(8);
    auto mix = optical_tomogram(make_state(Mixture{{{0.25, Fock{1}}, {0.75, Coherent{{1, 0}}}}}), g);
    auto a = optical_tomogram(make_state(Fock{1}), g);
    auto b = optical_tomogram(make_state(Coherent{{1, 0}}), g);
    for (std::size_t i = 0; i < mix.values.size(); ++i)
        EXPECT_NEAR(mix.values[i], 0.25 * a.values[i] + 0.75 * b.values[i], 1e-12);
}

TEST(TomogramEngine, GridSelectionCoversSupport) {
    auto s = make_state(Squeezed{1.0, 0.0, {}});
    Grid g = grid_for(s);
    EXPECT_GE(g.x_max, support_half_width(s));
    EXPECT_TRUE(g.is_symmetric());
    EXPECT_EQ(g.n_theta(), 64u);
}

TEST(TomogramEngine, InvalidGridRejected) {
    Grid g = Grid::standard(4);
    g.n_x = 10;
    EXPECT_THROW(optical_tomogram(make_state(Fock{0}), g), Error);
    g = Grid::standard(4);
    g.thetas = {0.5, 0.1};
    EXPECT_THROW(optical_tomogram(make_state(Fock{0}), g), Error);
}
