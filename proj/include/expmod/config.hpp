#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "marginal.hpp"
#include "numeric.hpp"

namespace expmod {

inline const std::set<std::string>& known_commands() {
    static const std::set<std::string> v{"correlation", "stationary", "exponent",
                                         "fit",         "verify",     "simulate",
                                         "spectrum",    "pstar",      "sweep"};
    return v;
}

inline const std::set<std::string>& known_suites() {
    static const std::set<std::string> v{"marginals",   "recurrence",  "concentration",
                                         "windows",     "fixedpoints", "appendixE",
                                         "all"};
    return v;
}

struct RunConfig {
    std::string command;
    std::string suite = "all";  // verify only
    std::optional<probability> p;
    std::vector<probability> p_grid;
    long long n_max = 100;
    int ell = 3;
    unsigned precision = 256;
    std::string mode = "float";  // float | rational
    std::uint64_t seed = 1;
    long long samples = 100000;
    long long burn_in = 60;
    long long length = 0;  // 0: derived from n_max
    std::string window;    // "lo:hi"
    std::string output;    // empty: stdout
    std::string format = "csv";  // csv | json
    long long rational_ell_max = 8;
};

// Shortest decimal spelling that round-trips, so JSON-number probabilities
// like 0.1 recover the exact decimal the author wrote.
inline std::string shortest_double_text(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        std::ostringstream os;
        os << std::setprecision(prec) << v;
        if (std::stod(os.str()) == v) return os.str();
    }
    throw std::invalid_argument("unrepresentable numeric value in config");
}

inline probability probability_from_json(const nlohmann::json& v) {
    if (v.is_string()) return parse_probability(v.get<std::string>());
    if (v.is_number()) return parse_probability(shortest_double_text(v.get<double>()));
    throw std::invalid_argument("probability entries must be strings or numbers");
}

// Applies a JSON config file to cfg. Flags named in `set_on_cli` were given
// explicitly and win over the file. Unknown keys are rejected outright:
// a typoed key silently falling back to a default is worse than an error.
inline void apply_config_file(RunConfig& cfg, const std::string& path,
                              const std::set<std::string>& set_on_cli) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config file must hold a JSON object");

    for (const auto& [key, value] : doc.items()) {
        if (set_on_cli.count(key)) continue;
        try {
            if (key == "p") {
                cfg.p = probability_from_json(value);
            } else if (key == "p-grid") {
                if (!value.is_array()) throw std::invalid_argument("p-grid must be an array");
                cfg.p_grid.clear();
                for (const auto& entry : value) cfg.p_grid.push_back(probability_from_json(entry));
            } else if (key == "n-max") {
                cfg.n_max = value.get<long long>();
            } else if (key == "ell") {
                cfg.ell = value.get<int>();
            } else if (key == "precision") {
                cfg.precision = value.get<unsigned>();
            } else if (key == "mode") {
                cfg.mode = value.get<std::string>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "samples") {
                cfg.samples = value.get<long long>();
            } else if (key == "burn-in") {
                cfg.burn_in = value.get<long long>();
            } else if (key == "length") {
                cfg.length = value.get<long long>();
            } else if (key == "window") {
                cfg.window = value.get<std::string>();
            } else if (key == "output") {
                cfg.output = value.get<std::string>();
            } else if (key == "format") {
                cfg.format = value.get<std::string>();
            } else if (key == "rational-ell-max") {
                cfg.rational_ell_max = value.get<long long>();
            } else {
                throw std::invalid_argument("unknown config key '" + key + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config key '" + key + "': " + e.what());
        }
    }
}

inline void validate_config(const RunConfig& cfg) {
    if (!known_commands().count(cfg.command))
        throw std::invalid_argument("unknown command '" + cfg.command + "'");
    if (cfg.command == "verify" && !known_suites().count(cfg.suite))
        throw std::invalid_argument("unknown verification suite '" + cfg.suite + "'");
    if (cfg.n_max < 2) throw std::invalid_argument("n-max must be at least 2");
    if (cfg.precision < 53) throw std::invalid_argument("precision must be at least 53 bits");
    if (cfg.mode != "float" && cfg.mode != "rational")
        throw std::invalid_argument("mode must be float or rational");
    if (cfg.format != "csv" && cfg.format != "json")
        throw std::invalid_argument("format must be csv or json");
    if (cfg.samples < 1) throw std::invalid_argument("samples must be positive");
    if (cfg.burn_in < 0) throw std::invalid_argument("burn-in must be nonnegative");
    if (cfg.length < 0) throw std::invalid_argument("length must be nonnegative");
    if (cfg.ell < 0 || cfg.ell > default_ell_max)
        throw std::invalid_argument("ell out of configured range");
    if (cfg.rational_ell_max < 0 || cfg.rational_ell_max > default_ell_max)
        throw std::invalid_argument("rational-ell-max out of configured range");
}

// "lo:hi" with integer endpoints.
inline std::pair<long long, long long> parse_window(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
        throw std::invalid_argument("window must look like lo:hi");
    if (!parse_uint_digits(s, 0, colon) || !parse_uint_digits(s, colon + 1, s.size()))
        throw std::invalid_argument("window endpoints must be nonnegative integers");
    long long lo = std::stoll(s.substr(0, colon));
    long long hi = std::stoll(s.substr(colon + 1));
    if (lo >= hi) throw std::invalid_argument("window needs lo < hi");
    return {lo, hi};
}

inline nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json echo;
    echo["command"] = cfg.command;
    if (cfg.command == "verify") echo["suite"] = cfg.suite;
    echo["p"] = cfg.p ? nlohmann::json(cfg.p->text) : nlohmann::json();
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& g : cfg.p_grid) grid.push_back(g.text);
    echo["p-grid"] = grid;
    echo["n-max"] = cfg.n_max;
    echo["ell"] = cfg.ell;
    echo["precision"] = cfg.precision;
    echo["mode"] = cfg.mode;
    echo["seed"] = cfg.seed;
    echo["samples"] = cfg.samples;
    echo["burn-in"] = cfg.burn_in;
    echo["length"] = cfg.length;
    echo["window"] = cfg.window;
    echo["output"] = cfg.output;
    echo["format"] = cfg.format;
    echo["rational-ell-max"] = cfg.rational_ell_max;
    return echo;
}

}  // namespace expmod
