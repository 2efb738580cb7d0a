#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tomocheck/common.hpp"
#include "tomocheck/density_ops.hpp"
#include "tomocheck/homodyne_sim.hpp"
#include "tomocheck/inequalities.hpp"
#include "tomocheck/portrait_bell.hpp"
#include "tomocheck/state_catalog.hpp"
#include "tomocheck/tomogram.hpp"
#include "tomocheck/two_mode.hpp"

namespace tomocheck::io {

using json = nlohmann::ordered_json;

[[noreturn]] inline void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

/// Rejects keys outside `allowed`.
inline void require_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) parse_error(std::string(where) + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) parse_error(std::string(where) + ": unknown field '" + key + "'");
    }
}

inline const json& field(const json& j, const char* key, std::string_view where) {
    auto it = j.find(key);
    if (it == j.end()) parse_error(std::string(where) + ": missing field '" + key + "'");
    return *it;
}

inline double number(const json& j, std::string_view what) {
    if (!j.is_number()) parse_error(std::string(what) + ": expected a number");
    return j.get<double>();
}

inline std::int64_t integer(const json& j, std::string_view what) {
    if (!j.is_number_integer()) parse_error(std::string(what) + ": expected an integer");
    return j.get<std::int64_t>();
}

inline complex complex_from(const json& j, std::string_view what) {
    if (!j.is_array() || j.size() != 2) parse_error(std::string(what) + ": expected [re, im]");
    return {number(j[0], what), number(j[1], what)};
}

inline json to_json(complex z) { return json::array({z.real(), z.imag()}); }

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        parse_error(path + ": " + e.what());
    }
}

// ---- states ----

inline PureSpec pure_spec_from_json(const json& j);

inline StateSpec state_spec_from_json(const json& j) {
    if (!j.is_object()) parse_error("state: expected an object");
    const auto& t = field(j, "type", "state");
    if (!t.is_string()) parse_error("state: 'type' must be a string");
    const auto type = t.get<std::string>();
    if (type == "mixture") {
        require_keys(j, {"type", "components"}, "mixture");
        const auto& comps = field(j, "components", "mixture");
        if (!comps.is_array()) parse_error("mixture: 'components' must be an array");
        Mixture m;
        for (const auto& c : comps) {
            require_keys(c, {"weight", "state"}, "mixture component");
            const auto& inner = field(c, "state", "mixture component");
            if (inner.is_object() && inner.contains("type") && inner["type"] == "mixture")
                throw Error(ErrorCode::NestedMixture, "mixtures cannot contain mixtures");
            m.components.push_back({number(field(c, "weight", "mixture component"), "weight"), pure_spec_from_json(inner)});
        }
        return m;
    }
    return to_state_spec(pure_spec_from_json(j));
}

inline PureSpec pure_spec_from_json(const json& j) {
    if (!j.is_object()) parse_error("state: expected an object");
    const auto& t = field(j, "type", "state");
    if (!t.is_string()) parse_error("state: 'type' must be a string");
    const auto type = t.get<std::string>();
    if (type == "fock") {
        require_keys(j, {"type", "n"}, "fock");
        auto n = integer(field(j, "n", "fock"), "fock.n");
        if (n < 0) throw Error(ErrorCode::NegativePhotonNumber, "photon number " + std::to_string(n));
        return Fock{static_cast<int>(n)};
    }
    if (type == "coherent") {
        require_keys(j, {"type", "alpha"}, "coherent");
        return Coherent{complex_from(field(j, "alpha", "coherent"), "coherent.alpha")};
    }
    if (type == "squeezed") {
        require_keys(j, {"type", "r", "phi", "alpha"}, "squeezed");
        Squeezed s;
        s.r = number(field(j, "r", "squeezed"), "squeezed.r");
        if (j.contains("phi")) s.phi = number(j["phi"], "squeezed.phi");
        if (j.contains("alpha")) s.alpha = complex_from(j["alpha"], "squeezed.alpha");
        return s;
    }
    if (type == "cat") {
        require_keys(j, {"type", "alpha", "parity"}, "cat");
        Cat c;
        c.alpha = complex_from(field(j, "alpha", "cat"), "cat.alpha");
        auto p = integer(field(j, "parity", "cat"), "cat.parity");
        if (p != 1 && p != -1) parse_error("cat.parity must be +1 or -1");
        c.parity = static_cast<int>(p);
        return c;
    }
    if (type == "superposition") {
        require_keys(j, {"type", "coeffs"}, "superposition");
        const auto& cs = field(j, "coeffs", "superposition");
        if (!cs.is_array()) parse_error("superposition.coeffs must be an array");
        FockSuperposition f;
        for (const auto& c : cs) f.coeffs.push_back(complex_from(c, "superposition.coeffs"));
        return f;
    }
    if (type == "mixture") throw Error(ErrorCode::NestedMixture, "mixtures cannot contain mixtures");
    parse_error("unknown state type '" + type + "'");
}

inline json to_json(const PureSpec& spec) {
    struct V {
        json operator()(const Fock& f) const { return {{"type", "fock"}, {"n", f.n}}; }
        json operator()(const Coherent& c) const { return {{"type", "coherent"}, {"alpha", to_json(c.alpha)}}; }
        json operator()(const Squeezed& s) const {
            return {{"type", "squeezed"}, {"r", s.r}, {"phi", s.phi}, {"alpha", to_json(s.alpha)}};
        }
        json operator()(const Cat& c) const {
            return {{"type", "cat"}, {"alpha", to_json(c.alpha)}, {"parity", c.parity}};
        }
        json operator()(const FockSuperposition& f) const {
            json cs = json::array();
            for (auto c : f.coeffs) cs.push_back(to_json(c));
            return {{"type", "superposition"}, {"coeffs", cs}};
        }
    };
    return std::visit(V{}, spec);
}

inline json to_json(const StateSpec& spec) {
    if (const auto* m = std::get_if<Mixture>(&spec)) {
        json comps = json::array();
        for (const auto& c : m->components) comps.push_back({{"weight", c.weight}, {"state", to_json(c.state)}});
        return {{"type", "mixture"}, {"components", comps}};
    }
    return std::visit(
        [](const auto& s) -> json {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Mixture>)
                return {};
            else
                return to_json(PureSpec{s});
        },
        spec);
}

inline StateSpec read_state_spec(const std::string& path) { return state_spec_from_json(read_json_file(path)); }

inline TwoModeStateSpec two_mode_spec_from_json(const json& j) {
    if (!j.is_object()) parse_error("two-mode state: expected an object");
    const auto& t = field(j, "type", "two-mode state");
    if (!t.is_string()) parse_error("two-mode state: 'type' must be a string");
    const auto type = t.get<std::string>();
    if (type == "tmsv") {
        require_keys(j, {"type", "r"}, "tmsv");
        return TwoModeSqueezedVacuum{number(field(j, "r", "tmsv"), "tmsv.r")};
    }
    if (type == "product") {
        require_keys(j, {"type", "mode1", "mode2"}, "product");
        return ProductSpec{state_spec_from_json(field(j, "mode1", "product")),
                           state_spec_from_json(field(j, "mode2", "product"))};
    }
    if (type == "separable_mixture") {
        require_keys(j, {"type", "components"}, "separable_mixture");
        const auto& comps = field(j, "components", "separable_mixture");
        if (!comps.is_array()) parse_error("separable_mixture: 'components' must be an array");
        SeparableMixtureSpec m;
        for (const auto& c : comps) {
            require_keys(c, {"weight", "mode1", "mode2"}, "separable component");
            m.components.push_back({number(field(c, "weight", "separable component"), "weight"),
                                    state_spec_from_json(field(c, "mode1", "separable component")),
                                    state_spec_from_json(field(c, "mode2", "separable component"))});
        }
        return m;
    }
    throw Error(ErrorCode::UnsupportedTwoModeFamily, "unsupported two-mode family '" + type + "'");
}

inline json to_json(const TwoModeStateSpec& spec) {
    struct V {
        json operator()(const TwoModeSqueezedVacuum& t) const { return {{"type", "tmsv"}, {"r", t.r}}; }
        json operator()(const ProductSpec& p) const {
            return {{"type", "product"}, {"mode1", to_json(p.mode1)}, {"mode2", to_json(p.mode2)}};
        }
        json operator()(const SeparableMixtureSpec& m) const {
            json comps = json::array();
            for (const auto& c : m.components)
                comps.push_back({{"weight", c.weight}, {"mode1", to_json(c.mode1)}, {"mode2", to_json(c.mode2)}});
            return {{"type", "separable_mixture"}, {"components", comps}};
        }
    };
    return std::visit(V{}, spec);
}

inline TwoModeStateSpec read_two_mode_spec(const std::string& path) {
    return two_mode_spec_from_json(read_json_file(path));
}

// ---- grids and tomograms ----

inline json to_json(const Grid& g) {
    return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"n_x", g.n_x}, {"thetas", g.thetas}};
}

inline Grid grid_from_json(const json& j) {
    require_keys(j, {"x_min", "x_max", "n_x", "thetas"}, "grid");
    Grid g;
    g.x_min = number(field(j, "x_min", "grid"), "grid.x_min");
    g.x_max = number(field(j, "x_max", "grid"), "grid.x_max");
    g.n_x = static_cast<int>(integer(field(j, "n_x", "grid"), "grid.n_x"));
    const auto& th = field(j, "thetas", "grid");
    if (!th.is_array()) parse_error("grid.thetas must be an array");
    for (const auto& t : th) g.thetas.push_back(number(t, "grid.thetas"));
    g.validate();
    return g;
}

inline json to_json(const Tomogram& tom) {
    json rows = json::array();
    for (std::size_t i = 0; i < tom.grid.n_theta(); ++i) {
        auto r = tom.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return {{"grid", to_json(tom.grid)}, {"rows", rows}, {"source", tom.source}};
}

/// Tomogram from {grid, rows, source}; extra report metadata fields are
/// ignored. Rows are validated and renormalized.
inline Tomogram tomogram_from_json(const json& j) {
    require_keys(j, {"grid", "rows", "source", "tool", "version", "config"}, "tomogram");
    Tomogram tom;
    tom.grid = grid_from_json(field(j, "grid", "tomogram"));
    const auto& rows = field(j, "rows", "tomogram");
    if (!rows.is_array() || rows.size() != tom.grid.n_theta())
        parse_error("tomogram: expected one row per angle");
    tom.values.reserve(tom.grid.n_theta() * tom.grid.size());
    for (const auto& r : rows) {
        if (!r.is_array() || r.size() != tom.grid.size()) parse_error("tomogram: row length differs from n_x");
        for (const auto& v : r) tom.values.push_back(number(v, "tomogram value"));
    }
    if (j.contains("source")) tom.source = j["source"].get<std::string>();
    validate_tomogram(tom);
    return tom;
}

inline void write_tomogram_csv(std::ostream& out, const Tomogram& tom) {
    out << "theta,x,w\n";
    for (std::size_t i = 0; i < tom.grid.n_theta(); ++i) {
        const std::string th = format_double(tom.grid.thetas[i]);
        for (std::size_t k = 0; k < tom.grid.size(); ++k)
            out << th << ',' << format_double(tom.grid.x(k)) << ',' << format_double(tom.at(i, k)) << '\n';
    }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

inline double parse_double(const std::string& s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) parse_error("bad number '" + s + "'");
    return v;
}

}  // namespace detail

/// Reads the "theta,x,w" dump. Rows must be grouped by theta with a common
/// x axis; the grid is rebuilt from the first and last x of each row.
inline Tomogram read_tomogram_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "theta,x,w") parse_error("tomogram csv: expected header theta,x,w");
    Tomogram tom;
    std::vector<double> xs;
    std::size_t row_len = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != 3) parse_error("tomogram csv: expected three columns");
        double th = detail::parse_double(cells[0]), x = detail::parse_double(cells[1]);
        if (tom.grid.thetas.empty() || th != tom.grid.thetas.back()) {
            if (!tom.grid.thetas.empty() && row_len != xs.size()) parse_error("tomogram csv: ragged rows");
            tom.grid.thetas.push_back(th);
            row_len = 0;
        }
        if (tom.grid.thetas.size() == 1)
            xs.push_back(x);
        else if (row_len >= xs.size() || xs[row_len] != x)
            parse_error("tomogram csv: x axis differs between rows");
        ++row_len;
        tom.values.push_back(detail::parse_double(cells[2]));
    }
    if (tom.grid.thetas.empty() || xs.size() < 2 || row_len != xs.size()) parse_error("tomogram csv: no complete rows");
    tom.grid.x_min = xs.front();
    tom.grid.x_max = xs.back();
    tom.grid.n_x = static_cast<int>(xs.size());
    tom.grid.validate();
    tom.source = "csv";
    validate_tomogram(tom);
    return tom;
}

inline Tomogram read_tomogram(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
        std::ifstream in(path);
        if (!in) parse_error("cannot open " + path);
        return read_tomogram_csv(in);
    }
    return tomogram_from_json(read_json_file(path));
}

// ---- density matrices ----

inline json to_json(const DensityMatrix& rho) {
    const auto& m = rho.elements();
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array(), ii = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            rr.push_back(m(i, k).real());
            ii.push_back(m(i, k).imag());
        }
        re.push_back(rr);
        im.push_back(ii);
    }
    return {{"n_max", rho.n_max()}, {"re", re}, {"im", im}};
}

inline DensityMatrix density_from_json(const json& j) {
    require_keys(j, {"n_max", "re", "im"}, "density matrix");
    auto n = integer(field(j, "n_max", "density matrix"), "n_max");
    if (n < 0) parse_error("density matrix: negative n_max");
    const auto d = static_cast<Eigen::Index>(n + 1);
    const auto& re = field(j, "re", "density matrix");
    const auto& im = field(j, "im", "density matrix");
    Eigen::MatrixXcd m(d, d);
    for (const auto* part : {&re, &im})
        if (!part->is_array() || part->size() != static_cast<std::size_t>(d))
            parse_error("density matrix: expected n_max + 1 rows");
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& rr = re[static_cast<std::size_t>(i)];
        const auto& ii = im[static_cast<std::size_t>(i)];
        if (!rr.is_array() || !ii.is_array() || rr.size() != static_cast<std::size_t>(d) ||
            ii.size() != static_cast<std::size_t>(d))
            parse_error("density matrix: expected n_max + 1 columns");
        for (Eigen::Index k = 0; k < d; ++k)
            m(i, k) = {number(rr[static_cast<std::size_t>(k)], "re"), number(ii[static_cast<std::size_t>(k)], "im")};
    }
    return DensityMatrix(m);
}

// ---- reports ----

inline json to_json(const InequalityReport& r) {
    return {{"kind", to_string(r.kind)}, {"theta", r.theta},   {"lhs", r.lhs},       {"bound", r.bound},
            {"margin", r.margin},        {"pass", r.pass},     {"inputs", r.inputs}};
}

inline json to_json(const MomentTriple& m) {
    return {{"theta", m.theta}, {"mean", m.mean}, {"second_moment", m.second_moment}, {"variance", m.variance}};
}

inline json to_json(const RotatedCovariance& c) {
    return {{"theta", c.theta},
            {"var_q", c.var_q},
            {"var_p", c.var_p},
            {"cov", c.cov},
            {"determinant", c.determinant()}};
}

inline json to_json(const EstimatedMoments& e) {
    json j = to_json(e.moments);
    j["se_mean"] = e.se_mean;
    j["se_variance"] = e.se_variance;
    j["n"] = e.n;
    return j;
}

inline json to_json(const EmpiricalTrifonovReport& r) {
    json batches = json::array();
    for (const auto& b : r.batches) batches.push_back(to_json(b));
    return {{"report", to_json(r.report)},
            {"ci_low", r.ci_low},
            {"ci_high", r.ci_high},
            {"verdict", to_string(r.verdict)},
            {"n_per_angle", r.n_per_angle},
            {"seed", r.seed},
            {"bootstrap", r.bootstrap},
            {"batches", batches}};
}

inline json to_json(const QubitDistribution& q) { return {{"p_plus", q.p_plus}, {"p_minus", q.p_minus}}; }

inline json to_json(const BellResult& b) {
    return {{"B", b.B},
            {"angles", b.angles},
            {"correlations",
             {{"E12", b.correlations[0]}, {"E13", b.correlations[1]}, {"E42", b.correlations[2]}, {"E43", b.correlations[3]}}},
            {"verdict", to_string(b.verdict)}};
}

inline void write_batch_csv(std::ostream& out, const SampleBatch& b) {
    out << "theta,x\n";
    const std::string th = format_double(b.theta);
    for (double x : b.values) out << th << ',' << format_double(x) << '\n';
}

struct ExperimentConfig {
    std::size_t n = 10000;
    std::uint64_t seed = 0;
    std::vector<double> thetas;
};

inline ExperimentConfig experiment_from_json(const json& j) {
    require_keys(j, {"n", "seed", "thetas"}, "experiment");
    ExperimentConfig c;
    auto n = integer(field(j, "n", "experiment"), "n");
    if (n <= 0) throw Error(ErrorCode::EmptyBatch, "n must be positive");
    c.n = static_cast<std::size_t>(n);
    const auto& s = field(j, "seed", "experiment");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        parse_error("experiment.seed must be a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
    const auto& th = field(j, "thetas", "experiment");
    if (!th.is_array()) parse_error("experiment.thetas must be an array");
    for (const auto& t : th) c.thetas.push_back(number(t, "experiment.thetas"));
    return c;
}

inline json to_json(const ExperimentConfig& c) { return {{"n", c.n}, {"seed", c.seed}, {"thetas", c.thetas}}; }

}  // namespace tomocheck::io
