#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tomocheck/cli.hpp"
#include "tomocheck/density_ops.hpp"
#include "tomocheck/evolution.hpp"
#include "tomocheck/homodyne_sim.hpp"
#include "tomocheck/inequalities.hpp"
#include "tomocheck/portrait_bell.hpp"
#include "tomocheck/tomogram_engine.hpp"

using namespace tomocheck;

namespace {

using cplx = std::complex<double>;

struct Outcome {
    bool pass = true;
    std::string detail;
    void need(bool ok, const std::string& what) {
        if (!ok && pass) detail = what;
        pass = pass && ok;
    }
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

Tomogram tomogram_of(const StateSpec& spec) {
    auto s = make_state(spec);
    return optical_tomogram(s, grid_for(s));
}

StateSpec random_spec(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    switch (gen() % 6) {
        case 0: return Fock{static_cast<int>(gen() % 5)};
        case 1: return Coherent{{u(gen), u(gen)}};
        case 2: return Squeezed{0.8 * std::abs(u(gen)), pi * u(gen), {0.5 * u(gen), 0.5 * u(gen)}};
        case 3: return Cat{{1.0 + 0.5 * u(gen), 0.5 * u(gen)}, gen() % 2 ? 1 : -1};
        case 4: return FockSuperposition{{{u(gen), u(gen)}, {u(gen), u(gen)}, {u(gen), 0.0}}};
        default: return Mixture{{{0.4, Fock{1}}, {0.6, Coherent{{u(gen), u(gen)}}}}};
    }
}

StateSpec random_mode(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    switch (gen() % 4) {
        case 0: return Coherent{{1.5 * u(gen), 1.5 * u(gen)}};
        case 1: return Squeezed{0.6 * std::abs(u(gen)), pi * u(gen), {u(gen), u(gen)}};
        case 2: return Cat{{1.0 + 0.5 * u(gen), 0.5 * u(gen)}, gen() % 2 ? 1 : -1};
        default: return FockSuperposition{{{u(gen), u(gen)}, {u(gen), u(gen)}}};
    }
}

SeparableMixtureSpec random_separable(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.2, 1.2);
    SeparableMixtureSpec m;
    int k = 1 + static_cast<int>(gen() % 3);
    std::vector<double> w(static_cast<std::size_t>(k));
    double total = 0;
    for (auto& x : w) total += x = u(gen);
    double acc = 0;
    for (int i = 0; i < k; ++i) {
        double wi = i + 1 < k ? w[static_cast<std::size_t>(i)] / total : 1.0 - acc;
        acc += wi;
        m.components.push_back({wi, random_mode(gen), random_mode(gen)});
    }
    return m;
}

// Tabulated CDF of a density on [-12, 12].
std::function<double(double)> tabulated_cdf(const std::function<double(double)>& density) {
    const double lo = -12, step = 1e-3;
    auto table = std::make_shared<std::vector<double>>(1, 0.0);
    for (double x = lo; x < 12; x += step) table->push_back(table->back() + step * density(x + 0.5 * step));
    return [table, lo, step](double x) {
        const auto& t = *table;
        double pos = std::clamp((x - lo) / step, 0.0, static_cast<double>(t.size() - 1));
        auto i = std::min(static_cast<std::size_t>(pos), t.size() - 2);
        return t[i] + (pos - static_cast<double>(i)) * (t[i + 1] - t[i]);
    };
}

// psi_theta(x) = sum_n c_n e^{-i n theta} psi_n(x)
cplx fock_series(const std::vector<cplx>& c, double x, double theta) {
    cplx v = 0;
    for (std::size_t n = 0; n < c.size(); ++n)
        v += c[n] * std::polar(1.0, -static_cast<double>(n) * theta) * oracle::fock_wavefunction(static_cast<unsigned>(n), x);
    return v;
}

Outcome heisenberg() {
    Outcome o;
    double v = heisenberg_check(tomogram_of(Fock{0})).lhs;
    o.need(std::abs(v - 0.25) <= 1e-6, "vacuum lhs " + num(v));
    for (int n = 1; n <= 5; ++n) {
        double l = heisenberg_check(tomogram_of(Fock{n})).lhs;
        o.need(std::abs(l - (n + 0.5) * (n + 0.5)) <= 1e-5, "fock " + std::to_string(n) + " lhs " + num(l));
    }
    return o;
}

Outcome robertson_schroedinger() {
    Outcome o;
    double worst = 0;
    for (double r : {0.0, 0.25, 0.5, 0.75, 1.0})
        for (double phi : {0.0, pi / 8, pi / 4}) {
            auto tom = tomogram_of(Squeezed{r, phi, {0.2, -0.1}});
            for (double th : tom.grid.thetas) worst = std::max(worst, std::abs(robertson_schrodinger_check(tom, th).lhs - 0.25));
        }
    o.need(worst <= 1e-6, "max |det - 1/4| " + num(worst));
    return o;
}

Outcome trifonov() {
    Outcome o;
    std::mt19937_64 gen(11);
    for (int k = 0; k < 10; ++k) {
        auto tom = tomogram_of(random_spec(gen));
        for (double th : tom.grid.thetas)
            if (trifonov_check(tom, tom, th).lhs != robertson_schrodinger_check(tom, th).lhs) {
                o.need(false, "reduction differs for " + tom.source);
                break;
            }
    }
    for (double r : {0.0, 0.25, 0.5, 1.0}) {
        auto a = make_state(Fock{0}), b = make_state(Squeezed{r, 0.0, {}});
        Grid g = grid_for(a, b);
        double l = trifonov_check(optical_tomogram(a, g), optical_tomogram(b, g), 0.0).lhs;
        o.need(std::abs(l - std::cosh(2 * r) / 4) <= 1e-6, "vacuum x squeezed r=" + num(r) + " lhs " + num(l));
    }
    for (int k = 0; k < 10; ++k) {
        auto a = make_state(random_spec(gen)), b = make_state(random_spec(gen));
        Grid g = grid_for(a, b);
        auto sweep = trifonov_sweep(optical_tomogram(a, g), optical_tomogram(b, g));
        o.need(sweep.reports.size() == 64 && sweep.max_lhs - sweep.min_lhs <= 1e-6,
               "theta spread " + num(sweep.max_lhs - sweep.min_lhs));
    }
    return o;
}

Outcome round_trip() {
    Outcome o;
    std::vector<StateSpec> specs = {Fock{0}, Fock{1}, Fock{2}, Fock{3}, Fock{4},
                                    FockSuperposition{{{1, 0}, {0, 1}}},
                                    FockSuperposition{{{0.5, 0}, {0, 0.5}, {-0.5, 0}, {0, 0}, {0.1, 0.4}}},
                                    FockSuperposition{{{0, 0}, {0, 0}, {1, 0}, {0, 0}, {0, -1}}},
                                    Mixture{{{0.3, Fock{0}}, {0.7, FockSuperposition{{{1, 0}, {0, 0}, {0, 0}, {0, 1}}}}}}};
    double worst = 0;
    for (const auto& spec : specs) {
        auto s = make_state(spec);
        auto truth = density_from_state(s, 4);
        auto back = density_from_tomogram(optical_tomogram(s, Grid::standard()), 4);
        worst = std::max(worst, (back.elements() - truth.elements()).cwiseAbs().maxCoeff());
    }
    o.need(worst < 1e-3, "max element error " + num(worst));
    return o;
}

Outcome homodyne() {
    Outcome o;
    const std::size_t n = 100000;
    const double critical = 1.6276 / std::sqrt(static_cast<double>(n));
    const double s2 = std::sqrt(2.0);
    struct Case {
        StateSpec spec;
        double theta;
        std::function<double(double)> cdf;
    };
    std::vector<cplx> sup{{1 / s2, 0}, {0, 1 / s2}};
    auto cat = [](cplx alpha, int parity) {
        double norm2 = 2.0 * (1.0 + parity * std::exp(-2.0 * std::norm(alpha)));
        return [=](double x) {
            return std::norm(oracle::coherent_by_series(alpha, x) + double(parity) * oracle::coherent_by_series(-alpha, x)) / norm2;
        };
    };
    std::vector<Case> cases = {
        {Fock{0}, 6 * pi / 64, [](double x) { return oracle::normal_cdf(x, 0.0, 0.5); }},
        {Fock{3}, 22 * pi / 64, tabulated_cdf([](double x) { return std::pow(oracle::fock_wavefunction(3, x), 2); })},
        {Coherent{{1, 0.5}}, pi / 4, [&](double x) { return oracle::normal_cdf(x, s2 * (std::cos(pi / 4) + 0.5 * std::sin(pi / 4)), 0.5); }},
        {Squeezed{0.5, 0.0, {}}, 0.0, [](double x) { return oracle::normal_cdf(x, 0.0, std::exp(-1.0) / 2); }},
        {Squeezed{0.5, pi / 8, {}}, 18 * pi / 64,
         [](double x) {
             double c = std::cos(18 * pi / 64 + pi / 8), s = std::sin(18 * pi / 64 + pi / 8);
             return oracle::normal_cdf(x, 0.0, std::exp(-1.0) / 2 * c * c + std::exp(1.0) / 2 * s * s);
         }},
        {Cat{{1.5, 0}, 1}, 0.0, tabulated_cdf(cat({1.5, 0}, 1))},
        {Cat{{1.0, 0.5}, -1}, 0.0, tabulated_cdf(cat({1.0, 0.5}, -1))},
        {FockSuperposition{sup}, 14 * pi / 64, tabulated_cdf([&](double x) { return std::norm(fock_series(sup, x, 14 * pi / 64)); })},
        {Mixture{{{0.4, Coherent{{1, 0}}}, {0.6, Coherent{{-0.5, 0}}}}}, 0.0, [&](double x) {
             return 0.4 * oracle::normal_cdf(x, s2, 0.5) + 0.6 * oracle::normal_cdf(x, -0.5 * s2, 0.5);
         }}};
    std::uint64_t seed = 500;
    for (const auto& c : cases) {
        auto tom = tomogram_of(c.spec);
        auto batch = sample_quadratures(tom, c.theta, n, seed++);
        double d = ks_statistic(batch.values, c.cdf);
        o.need(d < critical, "KS " + num(d) + " for " + tom.source);
    }

    auto vac = tomogram_of(Fock{0});
    int covered = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        auto rep = empirical_trifonov(vac, vac, 0.0, 10000, s);
        if (rep.ci_low <= 0.25 && 0.25 <= rep.ci_high) ++covered;
    }
    o.need(covered >= 180, "coverage " + std::to_string(covered) + "/200");
    if (o.pass) o.detail = "coverage " + std::to_string(covered) + "/200";
    return o;
}

Outcome portrait_bell() {
    Outcome o;
    const FactorizedKernel sign{SignKernel{0.0}, SignKernel{0.0}};
    std::mt19937_64 gen(6);

    for (const StateSpec& spec : std::vector<StateSpec>{Cat{{1.2, 0.3}, 1}, Squeezed{0.8, 0.2, {0.3, 0.3}}, Fock{2}}) {
        auto tom = tomogram_of(spec);
        for (double c : {-1.0, 0.0, 0.4})
            for (double th = 0; th < 2 * pi; th += 0.13) {
                auto q = portrait_continuous(tom, SignKernel{c}, th, true);
                o.need(std::abs(q.p_plus + q.p_minus - 1.0) <= 1e-9, "single-mode normalization");
            }
    }

    double worst_b = 0;
    std::vector<TwoModeTomogram> toms;
    for (int k = 0; k < 50; ++k) {
        TwoModeStateSpec spec = random_separable(gen);
        toms.push_back(two_mode_tomogram(spec, grid_for(spec, 1024, 32)));
    }
    for (double r : {0.2, 0.5, 0.8, 1.2}) toms.push_back(two_mode_tomogram(TwoModeSqueezedVacuum{r}));
    for (const auto& tom : toms) {
        for (double t1 : {0.0, 0.9, 2.3}) {
            double first = 0;
            for (double t2 : {0.2, 1.4, 3.0}) {
                auto jp = joint_portrait(tom, sign, t1, t2);
                o.need(std::abs(jp.sum() - 1.0) <= 1e-9, "joint normalization");
                double m1 = jp.p[0][0] + jp.p[0][1];
                if (t2 == 0.2) first = m1;
                o.need(std::abs(m1 - first) <= 1e-8, "no-signaling " + num(std::abs(m1 - first)));
            }
        }
        double b = bell_number(tom, sign).B;
        worst_b = std::max(worst_b, b);
        o.need(b <= 2.0 + 1e-6, "B = " + num(b));
    }

    double worst_e = 0;
    for (double r : {0.2, 0.5, 0.8})
        for (auto [t1, t2] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.4, 1.1}}) {
            double c = std::cosh(2 * r) / 2, s = std::sinh(2 * r) / 2 * std::cos(t1 + t2);
            double want = oracle::sign_correlation_2d(c, c, s);
            double got = correlation(joint_portrait(two_mode_tomogram(TwoModeSqueezedVacuum{r}), sign, t1, t2));
            double closed = 2 / pi * std::asin(std::tanh(2 * r) * std::cos(t1 + t2));
            worst_e = std::max({worst_e, std::abs(got - want), std::abs(got - closed)});
        }
    o.need(worst_e <= 1e-3, "TMSV correlation error " + num(worst_e));
    if (o.pass) o.detail = "max B " + num(worst_b);
    return o;
}

Outcome evolution() {
    Outcome o;
    auto evolved = [](const StateSpec& s, double t) -> StateSpec {
        cplx rot = std::polar(1.0, -t);
        if (const auto* c = std::get_if<Coherent>(&s)) return Coherent{c->alpha * rot};
        if (const auto* q = std::get_if<Squeezed>(&s)) return Squeezed{q->r, q->phi + t, q->alpha * rot};
        return s;
    };
    double worst = 0;
    for (const StateSpec& spec : std::vector<StateSpec>{Coherent{{1.0, 0.5}}, Squeezed{0.5, 0.2, {0.4, -0.3}}, Fock{3}}) {
        auto s0 = make_state(spec);
        Grid g = grid_for(s0);
        auto tom0 = optical_tomogram(s0, g);
        for (int k : {1, 7, 40, 101}) {
            double t = k * pi / static_cast<double>(g.n_theta());
            auto ev = evolve_harmonic(tom0, t);
            auto ref = optical_tomogram(make_state(evolved(spec, t)), g);
            for (std::size_t i = 0; i < ev.values.size(); ++i) worst = std::max(worst, std::abs(ev.values[i] - ref.values[i]));
        }
    }
    o.need(worst <= 1e-5, "L-inf " + num(worst));

    double residual = 0;
    const double d = 1e-4;
    for (const StateSpec& spec : std::vector<StateSpec>{Coherent{{0.7, -0.4}}, Squeezed{0.4, 0.1, {0.8, 0.2}}})
        for (double t : {0.3, 1.7})
            for (double theta : {0.2, 1.1, 2.4})
                for (double x : {-1.0, 0.2, 1.5}) {
                    double dt = (tomogram_value(make_state(evolved(spec, t + d)), x, theta) -
                                 tomogram_value(make_state(evolved(spec, t - d)), x, theta)) / (2 * d);
                    auto st = make_state(evolved(spec, t));
                    double dth = (tomogram_value(st, x, theta + d) - tomogram_value(st, x, theta - d)) / (2 * d);
                    residual = std::max(residual, std::abs(dt - dth));
                }
    o.need(residual < 1e-3, "residual " + num(residual));
    return o;
}

Outcome determinism() {
    Outcome o;
    const std::string dir = TOMOCHECK_DATA_DIR;
    std::vector<std::vector<std::string>> commands = {
        {"tomogram", "--state", dir + "/even_cat.json", "--n-theta", "8", "--n-x", "128"},
        {"check-trifonov", "--state1", dir + "/vacuum.json", "--state2", dir + "/squeezed05.json", "--theta", "0.3"},
        {"sample", "--state", dir + "/superposition01.json", "-n", "2000", "--seed", "4", "--theta", "0.5"},
        {"empirical-trifonov", "--state1", dir + "/vacuum.json", "--state2", dir + "/coherent.json", "-n", "2000",
         "--seed", "9", "--bootstrap", "200"},
        {"bell", "--two-mode", dir + "/separable.json"}};
    for (const auto& args : commands) {
        std::ostringstream a, b, ea, eb;
        int ca = cli::run(args, a, ea), cb = cli::run(args, b, eb);
        o.need(ca == cb && ca != cli::Usage, args[0] + " exit " + std::to_string(ca) + " " + ea.str());
        o.need(!a.str().empty() && a.str() == b.str(), args[0] + " output differs");
    }
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*fn)();
    };
    const Criterion criteria[] = {{"heisenberg bound", heisenberg},
                                  {"robertson-schroedinger saturation", robertson_schroedinger},
                                  {"trifonov check", trifonov},
                                  {"density round trip", round_trip},
                                  {"homodyne simulation", homodyne},
                                  {"portrait and bell number", portrait_bell},
                                  {"harmonic evolution", evolution},
                                  {"cli determinism", determinism}};
    int failures = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failures;
        std::printf("[%s] %d %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", index, c.name, secs, o.detail.empty() ? "" : ": ",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
