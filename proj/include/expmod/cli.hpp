#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "correlation.hpp"
#include "io.hpp"
#include "marginal.hpp"
#include "montecarlo.hpp"
#include "numeric.hpp"
#include "scaling.hpp"
#include "threads.hpp"
#include "verify.hpp"

namespace expmod {

namespace climain {

inline const probability& require_p(const RunConfig& cfg) {
    if (!cfg.p) throw std::invalid_argument(cfg.command + " needs --p");
    return *cfg.p;
}

inline std::vector<probability> probability_list(const RunConfig& cfg) {
    if (!cfg.p_grid.empty()) return cfg.p_grid;
    if (cfg.p) return {*cfg.p};
    throw std::invalid_argument(cfg.command + " needs --p or --p-grid");
}

inline void require_fraction(const probability& p, const std::string& verb) {
    if (!p.from_fraction)
        throw std::invalid_argument("rational " + verb + " needs the probability written as a "
                                    "fraction like 1/10, got '" + p.text + "'");
}

inline std::string word_text(std::uint32_t index, int length) {
    std::string w(static_cast<std::size_t>(length), '0');
    for (int i = 0; i < length; ++i)
        if ((index >> i) & 1u) w[static_cast<std::size_t>(i)] = '1';
    return w;
}

// "" for singular cells keeps the column numeric where it is defined.
struct ExponentCell {
    std::string beta;
    std::string status;
};

inline ExponentCell exponent_cell(const probability& p) {
    if (p.exact == rational(1, 2) || p.exact == rational(2, 3)) return {"", "singular"};
    auto b = beta_exponent(p.as_double());
    if (!b.valid) return {"", "singular-adjacent"};
    return {format_float(b.value), "valid"};
}

inline std::pair<long long, long long> fit_window(const RunConfig& cfg) {
    if (!cfg.window.empty()) {
        auto [lo, hi] = parse_window(cfg.window);
        if (lo < 1) throw std::invalid_argument("fit window must start at n >= 1");
        if (hi > cfg.n_max) throw std::invalid_argument("fit window ends past n-max");
        return {lo, hi};
    }
    return {std::max<long long>(2, cfg.n_max / 100), cfg.n_max};
}

inline Table run_correlation(const RunConfig& cfg) {
    const probability& p = require_p(cfg);
    Table t;
    t.schema = "correlation.v1";
    t.columns = {"n", "value", "mode", "precision"};
    t.summary["p"] = p.text;
    if (cfg.mode == "rational") {
        require_fraction(p, "correlation");
        auto series = correlation_series_exact(p, cfg.n_max);
        for (long long n = 2; n <= cfg.n_max; ++n)
            t.rows.push_back({std::to_string(n),
                              format_rational(series.values[static_cast<std::size_t>(n)]),
                              "rational", "exact"});
    } else {
        auto series = correlation_series(p, cfg.n_max, cfg.precision);
        for (long long n = 2; n <= cfg.n_max; ++n)
            t.rows.push_back({std::to_string(n),
                              format_float(series.values[static_cast<std::size_t>(n)]), "float",
                              std::to_string(series.verified_bits)});
        t.summary["verified-bits"] = series.verified_bits;
    }
    return t;
}

inline Table run_stationary(const RunConfig& cfg) {
    const probability& p = require_p(cfg);
    Table t;
    t.schema = "stationary.v1";
    t.columns = {"ell", "index", "word", "value", "mode"};
    t.summary["p"] = p.text;
    const int length = cfg.ell + 1;
    if (cfg.mode == "rational") {
        require_fraction(p, "stationary");
        if (cfg.ell > cfg.rational_ell_max)
            throw std::invalid_argument("exact stationary solve capped at ell = " +
                                        std::to_string(cfg.rational_ell_max) +
                                        "; raise --rational-ell-max to override");
        auto M = build_transition<rational>(cfg.ell, p.exact);
        auto pi = stationary_exact(M);
        for (std::uint32_t a = 0; a < pi.size(); ++a)
            t.rows.push_back({std::to_string(cfg.ell), std::to_string(a), word_text(a, length),
                              format_rational(pi[a]), "rational"});
    } else {
        auto M = build_transition<double>(cfg.ell, p.as_double());
        auto st = stationary(M);
        for (std::uint32_t a = 0; a < st.distribution.weights.size(); ++a)
            t.rows.push_back({std::to_string(cfg.ell), std::to_string(a), word_text(a, length),
                              format_float(st.distribution.weights[a]), "float"});
        t.summary["iterations"] = st.iterations;
    }
    return t;
}

inline Table run_exponent(const RunConfig& cfg) {
    Table t;
    t.schema = "exponent.v1";
    t.columns = {"p", "beta", "status"};
    for (const probability& p : probability_list(cfg)) {
        auto cell = exponent_cell(p);
        t.rows.push_back({p.text, cell.beta, cell.status});
    }
    return t;
}

inline Table run_fit(const RunConfig& cfg) {
    auto list = probability_list(cfg);
    auto [lo, hi] = fit_window(cfg);
    Table t;
    t.schema = "fit.v1";
    t.columns = {"p",    "beta_theoretical", "fit_slope", "residual",
                 "n_lo", "n_hi",             "points",    "status"};
    std::vector<std::vector<std::string>> slots(list.size());
    parallel_for(list.size(), [&, lo = lo, hi = hi](std::size_t i) {
        const probability& p = list[i];
        auto series = correlation_series(p, cfg.n_max, cfg.precision);
        auto fit = fit_power_law_magnitude(series.values, lo, hi);
        auto cell = exponent_cell(p);
        slots[i] = {p.text,
                    cell.beta,
                    format_float(fit.slope),
                    format_float(fit.residual),
                    std::to_string(fit.n_lo),
                    std::to_string(fit.n_hi),
                    std::to_string(fit.points),
                    cell.status};
    });
    t.rows = std::move(slots);
    return t;
}

inline Table run_simulate(const RunConfig& cfg) {
    const probability& p = require_p(cfg);
    std::vector<long long> distances;
    for (long long d = 1; d <= cfg.n_max; ++d) distances.push_back(d);
    SimulationOptions opt;
    opt.seed = cfg.seed;
    opt.samples = cfg.samples;
    opt.burn_in = cfg.burn_in;
    opt.length = cfg.length;
    auto estimates = estimate_correlations(p.as_double(), distances, opt);
    auto series = correlation_series(p, cfg.n_max, cfg.precision);
    Table t;
    t.schema = "simulate.v1";
    t.columns = {"n", "estimate", "ci_half_width", "exact_value", "z_score"};
    long long inside = 0;
    for (const auto& e : estimates) {
        double exact = static_cast<double>(series.values[static_cast<std::size_t>(e.distance)]);
        double z = (e.value - exact) / (e.half_width / 1.96);
        if (std::fabs(e.value - exact) <= e.half_width) ++inside;
        t.rows.push_back({std::to_string(e.distance), format_float(e.value),
                          format_float(e.half_width), format_float(exact), format_float(z)});
    }
    t.summary["samples"] = cfg.samples;
    t.summary["seed"] = cfg.seed;
    t.summary["burn-in"] = cfg.burn_in;
    t.summary["within-ci"] = inside;
    return t;
}

inline Table run_spectrum(const RunConfig& cfg) {
    const probability& p = require_p(cfg);
    long long lo = 0, hi = cfg.n_max;
    if (!cfg.window.empty()) {
        std::tie(lo, hi) = parse_window(cfg.window);
        if (hi > cfg.n_max) throw std::invalid_argument("spectrum window ends past n-max");
    }
    auto series = correlation_series(p, cfg.n_max, cfg.precision);
    auto rep = power_spectrum(series.values, lo, hi);
    Table t;
    t.schema = "spectrum.v1";
    t.columns = {"bin",         "omega", "power", "fitted_exponent",
                 "points_used", "dc",    "max_band_power"};
    for (std::size_t b = 0; b < rep.omega.size(); ++b)
        t.rows.push_back({std::to_string(b), format_float(rep.omega[b]),
                          format_float(rep.power[b]), format_float(rep.fitted_exponent),
                          std::to_string(rep.points_used), format_float(rep.dc),
                          format_float(rep.max_band_power)});
    t.summary["fitted-exponent"] = rep.fitted_exponent;
    t.summary["points-used"] = rep.points_used;
    t.summary["dc"] = rep.dc;
    t.summary["max-band-power"] = rep.max_band_power;
    auto cell = exponent_cell(p);
    if (cell.status == "valid")
        t.summary["target-exponent"] = 1.0 - beta_exponent(p.as_double()).value;
    return t;
}

inline Table run_pstar(const RunConfig& cfg) {
    auto est = p_star_estimate(cfg.n_max);
    Table t;
    t.schema = "pstar.v1";
    t.columns = {"value", "bracket_lo", "bracket_hi", "n_max", "bisections"};
    t.rows.push_back({format_float(est.value), format_float(est.bracket_lo),
                      format_float(est.bracket_hi), std::to_string(est.n_max), "22"});
    t.summary["truncated"] = est.truncated;
    return t;
}

inline Table run_sweep(const RunConfig& cfg) {
    auto list = probability_list(cfg);
    Table t;
    t.schema = "sweep.v1";
    t.columns = {"p", "n", "value", "mode", "precision"};
    std::vector<std::vector<std::vector<std::string>>> slots(list.size());
    if (cfg.mode == "rational")
        for (const probability& p : list) require_fraction(p, "sweep");
    parallel_for(list.size(), [&](std::size_t i) {
        const probability& p = list[i];
        auto& rows = slots[i];
        if (cfg.mode == "rational") {
            auto series = correlation_series_exact(p, cfg.n_max);
            for (long long n = 2; n <= cfg.n_max; ++n)
                rows.push_back({p.text, std::to_string(n),
                                format_rational(series.values[static_cast<std::size_t>(n)]),
                                "rational", "exact"});
        } else {
            auto series = correlation_series(p, cfg.n_max, cfg.precision);
            for (long long n = 2; n <= cfg.n_max; ++n)
                rows.push_back({p.text, std::to_string(n),
                                format_float(series.values[static_cast<std::size_t>(n)]), "float",
                                std::to_string(series.verified_bits)});
        }
    });
    for (auto& rows : slots)
        for (auto& row : rows) t.rows.push_back(std::move(row));
    t.summary["p-count"] = list.size();
    return t;
}

inline void emit_text(const RunConfig& cfg, const std::string& text) {
    if (cfg.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file '" + cfg.output + "'");
    out << text;
}

inline int run_verify(const RunConfig& cfg) {
    auto report = run_verify_suite(cfg.suite);
    nlohmann::json doc;
    doc["schema"] = "verify.v1";
    doc["config"] = config_echo(cfg);
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) {
        nlohmann::json entry;
        entry["suite"] = c.suite;
        entry["name"] = c.name;
        entry["passed"] = c.passed;
        entry["counted"] = c.counted;
        entry["measured"] = c.measured;
        entry["expected"] = c.expected;
        if (!c.note.empty()) entry["note"] = c.note;
        checks.push_back(std::move(entry));
    }
    doc["checks"] = std::move(checks);
    doc["counted"] = report.counted_total;
    doc["failed"] = report.counted_failed;
    doc["ok"] = report.ok();
    emit_text(cfg, doc.dump(2) + "\n");
    return report.ok() ? 0 : 4;
}

}  // namespace climain

inline int run_cli(int argc, char** argv) {
    RunConfig cfg;
    std::string p_text, config_path;
    std::vector<std::string> grid_texts;

    CLI::App app{"exact and statistical analysis of the expansion-modification dynamics"};
    app.add_option("command", cfg.command,
                   "correlation | stationary | exponent | fit | verify | simulate | "
                   "spectrum | pstar | sweep")
        ->required();
    auto* opt_suite =
        app.add_option("suite", cfg.suite,
                       "verify only: marginals | recurrence | concentration | windows | "
                       "fixedpoints | appendixE | all");
    auto* opt_p = app.add_option("--p", p_text, "probability, decimal or fraction (e.g. 1/10)");
    auto* opt_grid = app.add_option("--p-grid", grid_texts, "comma-separated probabilities")
                         ->delimiter(',');
    auto* opt_nmax = app.add_option("--n-max", cfg.n_max, "largest site distance / series length");
    auto* opt_ell = app.add_option("--ell", cfg.ell, "marginal order");
    auto* opt_prec = app.add_option("--precision", cfg.precision, "working precision in bits");
    auto* opt_mode = app.add_option("--mode", cfg.mode, "float | rational");
    auto* opt_seed = app.add_option("--seed", cfg.seed, "simulation seed");
    auto* opt_samples = app.add_option("--samples", cfg.samples, "simulation sample count");
    auto* opt_burn = app.add_option("--burn-in", cfg.burn_in, "substitution rounds before reading");
    auto* opt_length = app.add_option("--length", cfg.length, "simulated prefix length");
    auto* opt_window = app.add_option("--window", cfg.window, "lo:hi range for fit / spectrum");
    auto* opt_output = app.add_option("--output", cfg.output, "output file (default stdout)");
    auto* opt_format = app.add_option("--format", cfg.format, "csv | json");
    auto* opt_rell = app.add_option("--rational-ell-max", cfg.rational_ell_max,
                                    "largest order for exact stationary solves");
    app.add_option("--config", config_path, "JSON config file; explicit flags win");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        std::set<std::string> set_on_cli;
        auto mark = [&](const CLI::Option* o, const char* key) {
            if (o->count() > 0) set_on_cli.insert(key);
        };
        mark(opt_p, "p");
        mark(opt_grid, "p-grid");
        mark(opt_nmax, "n-max");
        mark(opt_ell, "ell");
        mark(opt_prec, "precision");
        mark(opt_mode, "mode");
        mark(opt_seed, "seed");
        mark(opt_samples, "samples");
        mark(opt_burn, "burn-in");
        mark(opt_length, "length");
        mark(opt_window, "window");
        mark(opt_output, "output");
        mark(opt_format, "format");
        mark(opt_rell, "rational-ell-max");
        if (!config_path.empty()) apply_config_file(cfg, config_path, set_on_cli);
        if (opt_p->count() > 0) cfg.p = parse_probability(p_text);
        if (opt_grid->count() > 0) {
            cfg.p_grid.clear();
            for (const auto& g : grid_texts) cfg.p_grid.push_back(parse_probability(g));
        }
        if (opt_suite->count() > 0 && cfg.command != "verify")
            throw std::invalid_argument("the suite positional applies to verify only");
        validate_config(cfg);

        if (cfg.command == "verify") return climain::run_verify(cfg);

        Table t;
        if (cfg.command == "correlation") t = climain::run_correlation(cfg);
        else if (cfg.command == "stationary") t = climain::run_stationary(cfg);
        else if (cfg.command == "exponent") t = climain::run_exponent(cfg);
        else if (cfg.command == "fit") t = climain::run_fit(cfg);
        else if (cfg.command == "simulate") t = climain::run_simulate(cfg);
        else if (cfg.command == "spectrum") t = climain::run_spectrum(cfg);
        else if (cfg.command == "pstar") t = climain::run_pstar(cfg);
        else if (cfg.command == "sweep") t = climain::run_sweep(cfg);

        std::ostringstream os;
        if (cfg.format == "csv")
            write_csv(os, t);
        else
            write_json(os, t, config_echo(cfg));
        climain::emit_text(cfg, os.str());
        return 0;
    } catch (const numeric_failure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::range_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace expmod
