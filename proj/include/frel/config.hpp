#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace frel {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : "config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

  private:
    std::string key_;
};

#ifndef FREL_DEFAULT_CALIBRATION
#define FREL_DEFAULT_CALIBRATION "data/calibration.json"
#endif

enum class KeyType { number, integer, unsigned_integer, string, boolean, number_list };

struct KeySpec {
    const char* key;
    KeyType type;
    json value;
    const char* doc;
};

// Every accepted key with its default. `tolerance.*` entries may be
// overridden individually; nothing else outside this table is accepted.
inline const std::vector<KeySpec>& config_keys() {
    static const std::vector<KeySpec> keys = {
        {"suite", KeyType::string, "all", "equivalence | heat | linear-carleman | symbol | quadratic-carleman | all"},
        {"seed", KeyType::unsigned_integer, 20261015u, "global 64-bit seed, split per (suite, check, index)"},
        {"threads", KeyType::integer, 0, "worker threads; 0 uses the hardware count"},
        {"output.dir", KeyType::string, "frel-out", "bundle directory; FREL_OUTPUT_DIR overrides"},
        {"calibration.path", KeyType::string, FREL_DEFAULT_CALIBRATION, "frozen constants table"},
        {"operator.s", KeyType::number, 0.5, "order s in (0, 1] for the heat and linear suites"},
        {"operator.m", KeyType::number, 1.0, "mass m >= 0 for the heat and linear suites"},
        {"grid.L", KeyType::number, 40.0, "box length for equivalence and basic heat checks"},
        {"grid.n", KeyType::integer, 4096, "nodes for equivalence and basic heat checks"},
        {"equivalence.s_values", KeyType::number_list, json::array({0.3, 0.5, 0.7}), "orders"},
        {"equivalence.m_values", KeyType::number_list, json::array({0.5, 1.0, 2.0}), "masses"},
        {"equivalence.radius", KeyType::number, 10.0, "comparison radius"},
        {"equivalence.identities", KeyType::boolean, false,
         "also run special-function, Bessel-identity and eigenfunction checks (always on for suite=all)"},
        {"heat.s_values", KeyType::number_list, json::array({0.3, 0.5, 0.7}), "orders for energy and kernel checks"},
        {"heat.random_data", KeyType::integer, 100, "random initial data for log-convexity"},
        {"heat.random_potentials", KeyType::integer, 20, "random potentials for the Picard sweep"},
        {"heat.steps", KeyType::integer, 100, "time steps of the energy identity"},
        {"heat.dt", KeyType::number, 0.01, "Picard time step"},
        {"heat.window_L", KeyType::number, 80.0, "box for weighted checks and eigenfunctions"},
        {"heat.window_n", KeyType::integer, 8192, "nodes for weighted checks and eigenfunctions"},
        {"heat.kernel_L", KeyType::number, 240.0, "box for the weighted L1 kernel identity"},
        {"heat.kernel_n", KeyType::integer, 16384, "nodes for the weighted L1 kernel identity"},
        {"linear.lambda", KeyType::number, 0.5, "spatial rate of the linear weight"},
        {"linear.A", KeyType::number, json(), "time rate A; null takes A* from the calibration table"},
        {"linear.trajectories", KeyType::integer, 50, "random (u0, V) trajectories"},
        {"linear.stress", KeyType::integer, 20, "extra trajectories with an additive source"},
        {"linear.L", KeyType::number, 60.0, "box length"},
        {"linear.n", KeyType::integer, 1024, "nodes"},
        {"linear.dt", KeyType::number, 1e-3, "time step"},
        {"linear.refine", KeyType::boolean, true, "recalibrate at 2n and compare"},
        {"quadratic.alpha", KeyType::number, 1.0, "Carleman parameter alpha"},
        {"quadratic.R", KeyType::number, 1.0, "scale R for the elliptic mode"},
        {"quadratic.parabolic_R", KeyType::number, 0.15, "scale R for the parabolic mode"},
        {"quadratic.functions", KeyType::integer, 20, "annulus-supported test functions per configuration"},
        {"quadratic.calibration_functions", KeyType::integer, 400, "annulus functions in the sampled cross-check of the calibration"},
        {"quadratic.n", KeyType::integer, 256, "nodes on a box of 6R"},
        {"quadratic.nt", KeyType::integer, 48, "time intervals for the parabolic mode"},
        {"quadratic.refine", KeyType::boolean, true, "recalibrate at 2n and compare"},
        {"symbol.points", KeyType::integer, 1000, "random points for the bracket cross-check"},
    };
    return keys;
}

inline const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> t = {
        {"equivalence", 1e-3},     {"macdonald_half", 1e-10},  {"asymptotic_ratio", 0.05},
        {"bessel_identity", 1e-5}, {"bessel_endpoint", 1e-4},  {"eigenfunction", 1e-3},
        {"explicit_kernel", 1e-4}, {"weighted_l1", 1e-3},      {"kernel_mass", 1e-12},
        {"energy_identity", 1e-4}, {"log_convexity", 1e-6},    {"constant_potential", 1e-5},
        {"tent_identity", 1e-4},   {"monotonicity", 1e-6},     {"d_routes", 1e-6},
        {"symbol_fd", 1e-5},       {"commutator", 1e-8},       {"decomposition", 1e-8},
        {"appendix", 1e-10},       {"refinement_factor", 2.0},
    };
    return t;
}

struct RunConfig {
    json values = json::object();  // fully populated, keyed by dotted name
    std::map<std::string, double> tolerances = default_tolerances();
    std::filesystem::path base_dir = ".";

    double num(const std::string& k) const { return values.at(k).get<double>(); }
    long integer(const std::string& k) const { return values.at(k).get<long>(); }
    bool flag(const std::string& k) const { return values.at(k).get<bool>(); }
    std::string str(const std::string& k) const { return values.at(k).get<std::string>(); }
    std::vector<double> list(const std::string& k) const { return values.at(k).get<std::vector<double>>(); }
    std::optional<double> maybe(const std::string& k) const {
        const auto& v = values.at(k);
        if (v.is_null()) return std::nullopt;
        return v.get<double>();
    }
    std::uint64_t seed() const { return values.at("seed").get<std::uint64_t>(); }
    std::string suite() const { return str("suite"); }
    double tol(const std::string& name) const { return tolerances.at(name); }
    bool runs(const std::string& suite_name) const { return suite() == "all" || suite() == suite_name; }

    std::filesystem::path resolve(const std::string& key) const {
        std::filesystem::path p = str(key);
        if (p.is_relative() && std::filesystem::exists(base_dir / p)) return base_dir / p;
        return p;
    }

    json to_json() const {
        json j = values;
        json t = json::object();
        for (const auto& [k, v] : tolerances) t[k] = v;
        j["tolerance"] = t;
        return j;
    }
};

inline const std::set<std::string>& known_suites() {
    static const std::set<std::string> s = {"equivalence", "heat", "linear-carleman", "symbol", "quadratic-carleman",
                                            "all"};
    return s;
}

namespace detail {

inline void check_type(const std::string& key, const json& v, KeyType t) {
    auto fail = [&](const char* what) { throw ConfigError(key, std::string("expected ") + what); };
    switch (t) {
        case KeyType::number:
            if (!v.is_number() && !v.is_null()) fail("a number");
            break;
        case KeyType::integer:
            if (!v.is_number_integer()) fail("an integer");
            break;
        case KeyType::unsigned_integer:
            if (!v.is_number_unsigned()) fail("an unsigned 64-bit integer");
            break;
        case KeyType::string:
            if (!v.is_string()) fail("a string");
            break;
        case KeyType::boolean:
            if (!v.is_boolean()) fail("a boolean");
            break;
        case KeyType::number_list:
            if (!v.is_array() || v.empty()) fail("a nonempty list of numbers");
            for (const auto& e : v)
                if (!e.is_number()) fail("a nonempty list of numbers");
            break;
    }
}

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace detail

inline RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir = ".") {
    if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
    RunConfig c;
    c.base_dir = base_dir;
    std::map<std::string, const KeySpec*> spec;
    for (const auto& k : config_keys()) {
        spec[k.key] = &k;
        c.values[k.key] = k.value;
    }
    for (const auto& [key, v] : doc.items()) {
        if (key.rfind("tolerance.", 0) == 0) {
            const std::string name = key.substr(10);
            if (!default_tolerances().count(name)) throw ConfigError(key, "unknown tolerance name");
            if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError(key, "tolerance must be a positive number");
            c.tolerances[name] = v.get<double>();
            continue;
        }
        auto it = spec.find(key);
        if (it == spec.end()) throw ConfigError(key, "unknown key");
        detail::check_type(key, v, it->second->type);
        c.values[key] = v;
    }

    using detail::require;
    require(known_suites().count(c.suite()) == 1, "suite", "unknown suite '" + c.suite() + "'");
    require(c.integer("threads") >= 0, "threads", "must be nonnegative");
    const double s = c.num("operator.s"), m = c.num("operator.m");
    require(s > 0.0 && s <= 1.0, "operator.s", "must lie in (0, 1]");
    require(m >= 0.0, "operator.m", "must be nonnegative");
    for (const char* k : {"grid.L", "heat.window_L", "heat.kernel_L", "linear.L", "equivalence.radius", "heat.dt",
                          "linear.dt", "quadratic.alpha", "quadratic.R", "quadratic.parabolic_R"})
        require(c.num(k) > 0.0, k, "must be positive");
    for (const char* k : {"grid.n", "heat.window_n", "heat.kernel_n", "linear.n", "quadratic.n"}) {
        const long n = c.integer(k);
        require(n >= 8 && n % 2 == 0, k, "must be even and at least 8");
    }
    for (const char* k : {"heat.random_data", "heat.random_potentials", "linear.trajectories", "linear.stress",
                          "quadratic.functions", "symbol.points"})
        require(c.integer(k) >= 0, k, "must be nonnegative");
    for (const char* k : {"heat.steps", "quadratic.nt"}) require(c.integer(k) >= 2, k, "must be at least 2");
    require(c.integer("quadratic.calibration_functions") >= 1, "quadratic.calibration_functions", "must be positive");
    for (double v : c.list("equivalence.s_values")) require(v > 0.0 && v < 1.0, "equivalence.s_values", "entries must lie in (0, 1)");
    for (double v : c.list("equivalence.m_values")) require(v > 0.0, "equivalence.m_values", "entries must be positive");
    for (double v : c.list("heat.s_values")) require(v > 0.0 && v <= 1.0, "heat.s_values", "entries must lie in (0, 1]");
    require(std::abs(c.num("linear.lambda")) < m, "linear.lambda", "|lambda| must be below operator.m");
    if (c.maybe("linear.A")) require(std::isfinite(*c.maybe("linear.A")), "linear.A", "must be finite");

    // Weight sections must be spelled out for the suites that use them.
    auto has_section = [&](const std::string& prefix) {
        for (const auto& [key, v] : doc.items())
            if (key.rfind(prefix, 0) == 0) return true;
        return false;
    };
    if (c.runs("linear-carleman") && !has_section("linear."))
        throw ConfigError("linear", "suite '" + c.suite() + "' needs a linear weight section (linear.*)");
    if ((c.runs("symbol") || c.runs("quadratic-carleman")) && !has_section("quadratic."))
        throw ConfigError("quadratic", "suite '" + c.suite() + "' needs a quadratic weight section (quadratic.*)");
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path().empty() ? "." : path.parent_path());
}

// Reference document listing every key and its default.
inline json reference_config() {
    json j = json::object();
    for (const auto& k : config_keys()) j[k.key] = k.value;
    for (const auto& [k, v] : default_tolerances()) j["tolerance." + k] = v;
    return j;
}

}  // namespace frel
