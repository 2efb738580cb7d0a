#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tomocheck/density_ops.hpp"
#include "tomocheck/evolution.hpp"
#include "tomocheck/homodyne_sim.hpp"
#include "tomocheck/inequalities.hpp"
#include "tomocheck/io.hpp"
#include "tomocheck/moments.hpp"
#include "tomocheck/portrait_bell.hpp"
#include "tomocheck/tomogram_engine.hpp"
#include "tomocheck/two_mode.hpp"

namespace tomocheck::cli {

enum ExitCode : int { Success = 0, Usage = 1, Violation = 2, Inconclusive = 3 };

struct RunConfig {
    std::string command;
    std::string state;
    std::string state1;
    std::string state2;
    std::string two_mode;
    std::string tomogram;
    std::optional<double> half_width;
    std::optional<int> n_x;
    std::optional<int> n_theta;
    double theta = 0;
    double t = 0;
    std::uint64_t seed = 0;
    std::size_t n = 10000;
    int n_max = 10;
    int bootstrap = 1000;
    double threshold = 0;
    bool interpolate = false;
    std::string output;
    std::string format = "json";
};

inline io::json to_json(const RunConfig& c) {
    io::json j = {{"command", c.command}};
    auto put = [&](const char* k, const std::string& v) {
        if (!v.empty()) j[k] = v;
    };
    put("state", c.state);
    put("state1", c.state1);
    put("state2", c.state2);
    put("two_mode", c.two_mode);
    put("tomogram", c.tomogram);
    io::json grid = io::json::object();
    if (c.half_width) grid["half_width"] = *c.half_width;
    if (c.n_x) grid["n_x"] = *c.n_x;
    if (c.n_theta) grid["n_theta"] = *c.n_theta;
    if (!grid.empty()) j["grid"] = grid;
    j["theta"] = c.theta;
    j["t"] = c.t;
    j["seed"] = c.seed;
    j["n"] = c.n;
    j["n_max"] = c.n_max;
    j["bootstrap"] = c.bootstrap;
    j["threshold"] = c.threshold;
    j["interpolate"] = c.interpolate;
    put("output", c.output);
    j["format"] = c.format;
    return j;
}

/// Strict config-file parsing; every key must be a RunConfig field.
inline RunConfig config_from_json(const io::json& j) {
    using namespace io;
    require_keys(j,
                 {"command", "state", "state1", "state2", "two_mode", "tomogram", "grid", "theta", "t", "seed", "n",
                  "n_max", "bootstrap", "threshold", "interpolate", "output", "format"},
                 "config");
    RunConfig c;
    auto str = [&](const char* k, std::string& dst) {
        if (!j.contains(k)) return;
        if (!j[k].is_string()) parse_error(std::string("config.") + k + " must be a string");
        dst = j[k].get<std::string>();
    };
    str("command", c.command);
    str("state", c.state);
    str("state1", c.state1);
    str("state2", c.state2);
    str("two_mode", c.two_mode);
    str("tomogram", c.tomogram);
    str("output", c.output);
    str("format", c.format);
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        require_keys(g, {"half_width", "n_x", "n_theta"}, "config.grid");
        if (g.contains("half_width")) c.half_width = number(g["half_width"], "grid.half_width");
        if (g.contains("n_x")) c.n_x = static_cast<int>(integer(g["n_x"], "grid.n_x"));
        if (g.contains("n_theta")) c.n_theta = static_cast<int>(integer(g["n_theta"], "grid.n_theta"));
    }
    if (j.contains("theta")) c.theta = number(j["theta"], "config.theta");
    if (j.contains("t")) c.t = number(j["t"], "config.t");
    if (j.contains("seed")) {
        auto s = integer(j["seed"], "config.seed");
        if (s < 0) parse_error("config.seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (j.contains("n")) {
        auto n = integer(j["n"], "config.n");
        if (n < 0) parse_error("config.n must be nonnegative");
        c.n = static_cast<std::size_t>(n);
    }
    if (j.contains("n_max")) c.n_max = static_cast<int>(integer(j["n_max"], "config.n_max"));
    if (j.contains("bootstrap")) c.bootstrap = static_cast<int>(integer(j["bootstrap"], "config.bootstrap"));
    if (j.contains("threshold")) c.threshold = number(j["threshold"], "config.threshold");
    if (j.contains("interpolate")) {
        if (!j["interpolate"].is_boolean()) parse_error("config.interpolate must be a boolean");
        c.interpolate = j["interpolate"].get<bool>();
    }
    return c;
}

namespace detail {

/// Applies the overrides and adds theta, theta + pi/4 and theta + pi/2 to the
/// angle set so computed tomograms never need interpolation at --theta.
inline Grid resolve_grid(const RunConfig& c, Grid g) {
    int n_theta = c.n_theta.value_or(static_cast<int>(g.n_theta()));
    if (n_theta < 1) throw Error(ErrorCode::InvalidGrid, "n_theta must be positive");
    g = Grid::symmetric(c.half_width.value_or(g.x_max), c.n_x.value_or(g.n_x), n_theta);
    for (double d : {0.0, 0.25 * pi, 0.5 * pi}) g.thetas.push_back(c.theta + d);
    g.normalize_thetas();
    g.validate();
    return g;
}

inline Tomogram single_tomogram(const RunConfig& c) {
    if (!c.tomogram.empty()) {
        if (!c.state.empty()) throw Error(ErrorCode::InvalidArgument, "give either --state or --tomogram");
        return io::read_tomogram(c.tomogram);
    }
    if (c.state.empty()) throw Error(ErrorCode::InvalidArgument, "--state or --tomogram is required");
    auto s = make_state(io::read_state_spec(c.state));
    return optical_tomogram(s, resolve_grid(c, grid_for(s)));
}

inline std::pair<Tomogram, Tomogram> tomogram_pair(const RunConfig& c) {
    if (c.state1.empty() || c.state2.empty()) throw Error(ErrorCode::InvalidArgument, "--state1 and --state2 are required");
    auto a = make_state(io::read_state_spec(c.state1));
    auto b = make_state(io::read_state_spec(c.state2));
    Grid g = resolve_grid(c, grid_for(a, b));
    return {optical_tomogram(a, g), optical_tomogram(b, g)};
}

inline io::json envelope(const RunConfig& c, const Grid* grid) {
    io::json j = {{"tool", "tomocheck"}, {"version", std::string(version)}, {"config", to_json(c)}};
    if (grid) j["grid"] = io::to_json(*grid);
    return j;
}

inline int report_exit(bool pass) { return pass ? Success : Violation; }

}  // namespace detail

/// Executes one resolved command, writing the artifact to `out`.
inline int execute(const RunConfig& c, std::ostream& out) {
    const bool csv = c.format == "csv";
    if (!csv && c.format != "json") throw Error(ErrorCode::InvalidArgument, "format must be json or csv");
    auto emit = [&](const io::json& j) { out << j.dump(2) << '\n'; };

    if (c.command == "tomogram" || c.command == "evolve") {
        Tomogram tom = detail::single_tomogram(c);
        if (c.command == "evolve") tom = evolve_harmonic(tom, c.t);
        if (csv) {
            io::write_tomogram_csv(out, tom);
        } else {
            auto j = detail::envelope(c, nullptr);
            io::json body = io::to_json(tom);
            for (auto& [k, v] : body.items()) j[k] = v;
            emit(j);
        }
        return Success;
    }
    if (c.command == "moments") {
        Tomogram tom = detail::single_tomogram(c);
        MomentOptions opt{c.interpolate};
        if (csv) {
            out << "theta,mean,second_moment,variance\n";
            for (double th : tom.grid.thetas) {
                auto m = angle_moments(tom, th, opt);
                out << format_double(m.theta) << ',' << format_double(m.mean) << ',' << format_double(m.second_moment)
                    << ',' << format_double(m.variance) << '\n';
            }
            return Success;
        }
        auto j = detail::envelope(c, &tom.grid);
        j["moments"] = io::to_json(angle_moments(tom, c.theta, opt));
        j["covariance"] = io::to_json(rotated_covariance(tom, c.theta, opt));
        emit(j);
        return Success;
    }
    if (c.command == "check-heisenberg" || c.command == "check-rs") {
        Tomogram tom = detail::single_tomogram(c);
        MomentOptions opt{c.interpolate};
        auto r = c.command == "check-rs" ? robertson_schrodinger_check(tom, c.theta, opt) : heisenberg_check(tom, opt);
        auto j = detail::envelope(c, &tom.grid);
        j["report"] = io::to_json(r);
        emit(j);
        return detail::report_exit(r.pass);
    }
    if (c.command == "check-trifonov") {
        auto [a, b] = detail::tomogram_pair(c);
        auto r = trifonov_check(a, b, c.theta, MomentOptions{c.interpolate});
        auto j = detail::envelope(c, &a.grid);
        j["report"] = io::to_json(r);
        emit(j);
        return detail::report_exit(r.pass);
    }
    if (c.command == "sample") {
        Tomogram tom = detail::single_tomogram(c);
        auto batch = sample_quadratures(tom, c.theta, c.n, c.seed);
        if (csv) {
            io::write_batch_csv(out, batch);
            return Success;
        }
        auto j = detail::envelope(c, &tom.grid);
        j["experiment"] = io::to_json(io::ExperimentConfig{c.n, c.seed, {c.theta}});
        if (batch.values.size() >= 2) j["estimate"] = io::to_json(estimate_moments(batch));
        j["values"] = batch.values;
        emit(j);
        return Success;
    }
    if (c.command == "empirical-trifonov") {
        auto [a, b] = detail::tomogram_pair(c);
        EmpiricalOptions opt;
        opt.bootstrap = c.bootstrap;
        auto r = empirical_trifonov(a, b, c.theta, c.n, c.seed, opt);
        auto j = detail::envelope(c, &a.grid);
        j["result"] = io::to_json(r);
        emit(j);
        switch (r.verdict) {
            case StatisticalVerdict::Pass: return Success;
            case StatisticalVerdict::Violation: return Violation;
            case StatisticalVerdict::Inconclusive: return Inconclusive;
        }
        return Inconclusive;
    }
    if (c.command == "reconstruct") {
        Tomogram tom = detail::single_tomogram(c);
        auto rho = density_from_tomogram(tom, c.n_max);
        auto j = detail::envelope(c, &tom.grid);
        j["density"] = io::to_json(rho);
        j["trace"] = rho.trace();
        j["min_eigenvalue"] = rho.min_eigenvalue();
        emit(j);
        return Success;
    }
    if (c.command == "portrait") {
        Tomogram tom = detail::single_tomogram(c);
        PortraitKernel k = SignKernel{c.threshold};
        if (csv) {
            out << "theta,p_plus,p_minus\n";
            for (std::size_t i = 0; i < tom.grid.n_theta(); ++i) {
                auto q = portrait_row(tom.grid, tom.row(i), k);
                out << format_double(tom.grid.thetas[i]) << ',' << format_double(q.p_plus) << ','
                    << format_double(q.p_minus) << '\n';
            }
            return Success;
        }
        auto j = detail::envelope(c, &tom.grid);
        j["portrait"] = io::to_json(portrait_continuous(tom, k, c.theta, c.interpolate));
        emit(j);
        return Success;
    }
    if (c.command == "bell") {
        if (c.two_mode.empty()) throw Error(ErrorCode::InvalidArgument, "--two-mode is required");
        auto spec = io::read_two_mode_spec(c.two_mode);
        Grid g = detail::resolve_grid(c, grid_for(spec));
        auto tom = two_mode_tomogram(spec, g);
        auto r = bell_number(tom, {SignKernel{c.threshold}, SignKernel{c.threshold}});
        const bool gridded = std::holds_alternative<GriddedProductMixture>(tom.form);
        auto j = detail::envelope(c, gridded ? &g : nullptr);
        j["source"] = tom.source;
        j["result"] = io::to_json(r);
        emit(j);
        return r.verdict == BellVerdict::Violation ? Violation : Success;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + c.command + "'");
}

/// Parses argv-style arguments (without the program name), runs the command
/// and returns the exit code. Diagnostics go to `err` as one line.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Optical tomogram uncertainty and Bell checks", "tomocheck"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1, 1);

    struct Flags {
        std::string config, state, state1, state2, two_mode, tomogram, output, format;
        double half_width = 0, theta = 0, t = 0, threshold = 0;
        int n_x = 0, n_theta = 0, n_max = 0, bootstrap = 0;
        std::uint64_t seed = 0;
        std::size_t n = 0;
        bool interpolate = false;
    } f;
    struct Bound {
        CLI::App* app;
        std::vector<std::pair<std::string, CLI::Option*>> opts;
    };
    std::vector<Bound> subs;

    auto add = [&](const std::string& name, const std::string& help, std::vector<std::string> extra) {
        auto* sub = app.add_subcommand(name, help);
        Bound b{sub, {}};
        auto opt = [&](const std::string& key, CLI::Option* o) { b.opts.emplace_back(key, o); };
        opt("config", sub->add_option("--config", f.config, "RunConfig JSON file"));
        opt("output", sub->add_option("-o,--output", f.output, "output path (default: stdout)"));
        opt("format", sub->add_option("--format", f.format, "json or csv"));
        opt("half_width", sub->add_option("--half-width", f.half_width, "grid half-width"));
        opt("n_x", sub->add_option("--n-x", f.n_x, "grid points in X"));
        opt("n_theta", sub->add_option("--n-theta", f.n_theta, "number of angles on [0, pi)"));
        for (const auto& e : extra) {
            if (e == "state") opt(e, sub->add_option("--state", f.state, "state JSON file"));
            if (e == "tomogram") opt(e, sub->add_option("--tomogram", f.tomogram, "tomogram JSON or CSV file"));
            if (e == "pair") {
                opt("state1", sub->add_option("--state1", f.state1, "first state JSON file"));
                opt("state2", sub->add_option("--state2", f.state2, "second state JSON file"));
            }
            if (e == "two_mode") opt(e, sub->add_option("--two-mode", f.two_mode, "two-mode state JSON file"));
            if (e == "theta") opt(e, sub->add_option("--theta", f.theta, "local-oscillator phase"));
            if (e == "t") opt(e, sub->add_option("--t", f.t, "evolution time"));
            if (e == "seed") opt(e, sub->add_option("--seed", f.seed, "random seed"));
            if (e == "n") opt(e, sub->add_option("-n,--samples", f.n, "samples per angle"));
            if (e == "n_max") opt(e, sub->add_option("--n-max", f.n_max, "Fock cutoff"));
            if (e == "bootstrap") opt(e, sub->add_option("--bootstrap", f.bootstrap, "bootstrap replicas"));
            if (e == "threshold") opt(e, sub->add_option("--threshold", f.threshold, "sign-kernel threshold"));
            if (e == "interpolate") opt(e, sub->add_flag("--interpolate", f.interpolate, "interpolate between angles"));
        }
        subs.push_back(std::move(b));
    };
    add("tomogram", "compute an optical tomogram", {"state"});
    add("moments", "quadrature moments", {"state", "tomogram", "theta", "interpolate"});
    add("check-heisenberg", "Heisenberg relation Var(0) Var(pi/2) >= 1/4", {"state", "tomogram", "interpolate"});
    add("check-rs", "Robertson-Schrodinger relation", {"state", "tomogram", "theta", "interpolate"});
    add("check-trifonov", "two-state Trifonov relation", {"pair", "theta", "interpolate"});
    add("sample", "simulate homodyne outcomes", {"state", "tomogram", "theta", "seed", "n"});
    add("empirical-trifonov", "Trifonov relation from simulated data", {"pair", "theta", "seed", "n", "bootstrap"});
    add("reconstruct", "density matrix from a tomogram", {"state", "tomogram", "n_max"});
    add("portrait", "qubit portrait of a tomogram", {"state", "tomogram", "theta", "threshold", "interpolate"});
    add("bell", "Bell number of a two-mode state", {"two_mode", "threshold"});
    add("evolve", "harmonic evolution of a tomogram", {"state", "tomogram", "t"});

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Success;
    } catch (const CLI::CallForVersion&) {
        out << version << '\n';
        return Success;
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        err << "tomocheck: " << msg.substr(0, msg.find('\n')) << '\n';
        return Usage;
    }

    const Bound* active = nullptr;
    for (const auto& b : subs)
        if (b.app->parsed()) active = &b;
    auto given = [&](const std::string& key) {
        for (const auto& [k, o] : active->opts)
            if (k == key) return o->count() > 0;
        return false;
    };

    try {
        RunConfig c;
        if (given("config")) {
            c = config_from_json(io::read_json_file(f.config));
            if (!c.command.empty() && c.command != active->app->get_name())
                throw Error(ErrorCode::InvalidArgument,
                            "config command '" + c.command + "' does not match '" + active->app->get_name() + "'");
        }
        c.command = active->app->get_name();
        if (given("state")) c.state = f.state;
        if (given("state1")) c.state1 = f.state1;
        if (given("state2")) c.state2 = f.state2;
        if (given("two_mode")) c.two_mode = f.two_mode;
        if (given("tomogram")) c.tomogram = f.tomogram;
        if (given("half_width")) c.half_width = f.half_width;
        if (given("n_x")) c.n_x = f.n_x;
        if (given("n_theta")) c.n_theta = f.n_theta;
        if (given("theta")) c.theta = f.theta;
        if (given("t")) c.t = f.t;
        if (given("seed")) c.seed = f.seed;
        if (given("n")) c.n = f.n;
        if (given("n_max")) c.n_max = f.n_max;
        if (given("bootstrap")) c.bootstrap = f.bootstrap;
        if (given("threshold")) c.threshold = f.threshold;
        if (given("interpolate")) c.interpolate = f.interpolate;
        if (given("output")) c.output = f.output;
        if (given("format")) c.format = f.format;

        std::ostringstream buffer;
        int code = execute(c, buffer);
        if (c.output.empty() || c.output == "-") {
            out << buffer.str();
        } else {
            std::ofstream file(c.output, std::ios::binary);
            if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write " + c.output);
            file << buffer.str();
        }
        return code;
    } catch (const Error& e) {
        err << "tomocheck: " << e.what() << '\n';
        return Usage;
    } catch (const std::exception& e) {
        err << "tomocheck: " << e.what() << '\n';
        return Usage;
    }
}

}  // namespace tomocheck::cli
