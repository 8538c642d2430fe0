#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "correlation.hpp"
#include "marginal.hpp"
#include "nu_weights.hpp"
#include "numeric.hpp"
#include "scaling.hpp"

// One-shot verification suites behind the verify command. Each check firm
// enough to gate a build is counted; probes of statements that the source
// material gets wrong are reported with counted = false so the honest
// measurement is visible without failing a correct build. The corrected
// counterparts of those statements are counted.

namespace expmod {

struct VerifyCheck {
    std::string suite;
    std::string name;
    bool passed = false;
    bool counted = true;
    std::string measured;
    std::string expected;
    std::string note;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    long long counted_total = 0;
    long long counted_failed = 0;
    bool ok() const { return counted_failed == 0; }
};

namespace detail {

inline void add_check(VerifyReport& r, std::string suite, std::string name, bool passed,
                      std::string measured, std::string expected, std::string note = "",
                      bool counted = true) {
    r.checks.push_back({std::move(suite), std::move(name), passed, counted, std::move(measured),
                        std::move(expected), std::move(note)});
    if (counted) {
        ++r.counted_total;
        if (!passed) ++r.counted_failed;
    }
}

inline std::string text_of(double v) { return format_float(v); }
inline std::string text_of(const big_float& v) { return format_float(v); }

inline std::string brief(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

inline std::vector<rational> twenty_grid() {
    std::vector<rational> grid;
    for (int i = 1; i <= 19; ++i) grid.emplace_back(i, 20);
    return grid;
}

}  // namespace detail

// --------------------------------------------------------------------------
// marginals: finite-order chains, their stationary vectors, symmetries.

inline void verify_marginals(VerifyReport& r) {
    using detail::add_check;
    const std::string s = "marginals";

    auto p10 = parse_probability("1/10");
    auto M4 = build_transition<rational>(4, p10.exact);
    bool sums_ok = true;
    for (const auto& row : M4.rows) {
        rational total(0);
        for (const auto& [a, w] : row) total += w;
        sums_ok = sums_ok && total == 1;
    }
    add_check(r, s, "transition-rows-sum-to-one", sums_ok, sums_ok ? "1 (exact)" : "!= 1",
              "every row mass exactly 1");

    auto fast3 = build_transition<rational>(3, rational(1, 4));
    auto brute3 = brute_force_transition<rational>(3, rational(1, 4));
    auto dense = [](const TransitionMatrix<rational>& M) {
        std::vector<std::vector<rational>> d(M.dim, std::vector<rational>(M.dim, rational(0)));
        for (std::size_t b = 0; b < M.dim; ++b)
            for (const auto& [a, w] : M.rows[b]) d[b][static_cast<std::size_t>(a)] += w;
        return d;
    };
    bool same = dense(fast3) == dense(brute3);
    add_check(r, s, "prefix-builder-matches-brute-force", same,
              same ? "identical entries" : "entries differ", "exact equality at order 3, p = 1/4");

    auto pi4 = stationary_exact(M4);
    rational mass(0);
    for (const auto& v : pi4) mass += v;
    std::vector<rational> image = apply_to_distribution(M4, pi4);
    bool fixed = image == pi4;
    add_check(r, s, "stationary-vector-is-exact-fixed-point", fixed && mass == 1,
              fixed ? "mu M = mu, total 1" : "moved under M", "exact fixed point, unit mass");

    bool flip_ok = true;
    for (std::uint32_t a = 0; a < M4.dim; ++a)
        flip_ok = flip_ok && pi4[a] == pi4[flip_index(a, 5)];
    add_check(r, s, "stationary-flip-symmetry", flip_ok,
              flip_ok ? "pi(a) = pi(~a) exactly" : "asymmetric",
              "global negation invariance");

    auto M3 = build_transition<rational>(3, p10.exact);
    auto pi3 = stationary_exact(M3);
    rational resid = compatibility_residual(MarginalDistribution<rational>{4, pi4},
                                            MarginalDistribution<rational>{3, pi3});
    add_check(r, s, "stationary-family-compatibility", resid == 0,
              resid == 0 ? "0 (exact)" : format_rational(resid),
              "order-4 marginal collapses onto order-3");

    std::size_t power = primitivity_certificate(transition_support(M4));
    add_check(r, s, "primitivity-certificate", power >= 1 && power <= 64, std::to_string(power),
              "strictly positive support power within 64");

    auto M6f = build_transition<double>(6, 0.3);
    auto pi6f = stationary(M6f).distribution.weights;
    auto pi6x = stationary_exact(build_transition<rational>(6, rational(3, 10)));
    double worst = 0;
    for (std::size_t i = 0; i < pi6f.size(); ++i)
        worst = std::max(worst, std::fabs(pi6f[i] - pi6x[i].convert_to<double>()));
    add_check(r, s, "float-iteration-matches-exact-solve", worst <= 1e-12, detail::text_of(worst),
              "max abs deviation <= 1e-12");
}

// --------------------------------------------------------------------------
// recurrence: series vs eigenvector, closed forms, decay and contraction.

inline void verify_recurrence(VerifyReport& r) {
    using detail::add_check;
    const std::string s = "recurrence";

    for (const char* ps : {"1/10", "1/4", "1/2"}) {
        auto p = parse_probability(ps);
        auto exact = correlation_series_exact(p, 10);
        auto chain = build_transition<rational>(10, p.exact);
        MarginalDistribution<rational> dist{10, stationary_exact(chain)};
        bool dual = correlation_from_marginal(dist, 0) == rational(1, 4);
        for (int n = 1; n <= 10 && dual; ++n)
            dual = correlation_from_marginal(dist, n) == exact.values[static_cast<std::size_t>(n)];
        add_check(r, s, std::string("dual-method-exact-p=") + ps, dual,
                  dual ? "recurrence = eigenvector (exact)" : "methods disagree",
                  "exact match for n <= 10");

        precision_guard guard(256);
        auto series = correlation_series(p, 10);
        big_float worst(0);
        for (int n = 0; n <= 10; ++n) {
            big_float diff = series.values[static_cast<std::size_t>(n)] -
                             exact.values[static_cast<std::size_t>(n)].convert_to<big_float>();
            if (diff < 0) diff = -diff;
            if (diff > worst) worst = diff;
        }
        add_check(r, s, std::string("dual-method-float-p=") + ps,
                  worst <= big_float(1e-10), detail::text_of(worst),
                  "abs deviation <= 1e-10 for n <= 10");
    }

    bool closed_ok = true, nu_ok = true, wsum_ok = true;
    double claimed_worst = 0;
    for (const rational& pr : detail::twenty_grid()) {
        for (long long n = 0; n <= 200 && closed_ok; ++n)
            closed_ok = S_closed(pr, n) == S_recursive(pr, n);
        for (long long n = 1; n <= 200 && nu_ok; ++n) {
            rational total(0);
            for (long long k = (n + 1) / 2; k <= n; ++k) total += nu(pr, k, n);
            nu_ok = total == S_closed(pr, n);
        }
        for (long long n = 2; n <= 200; ++n) {
            if (wsum_ok) wsum_ok = weight_sum_direct(pr, n) == weight_sum_corrected(pr, n);
            rational direct = weight_sum_direct(pr, n);
            rational claim = weight_sum_claimed(pr, n);
            if (direct != 0) {
                rational rel = (direct - claim) / direct;
                if (rel < 0) rel = -rel;
                claimed_worst = std::max(claimed_worst, rel.convert_to<double>());
            }
        }
    }
    add_check(r, s, "row-mass-closed-form-vs-recursion", closed_ok,
              closed_ok ? "identical (exact)" : "differ",
              "S closed = S recursive, n <= 200, 19-point grid");
    add_check(r, s, "nu-row-total-equals-row-mass", nu_ok,
              nu_ok ? "identical (exact)" : "differ", "sum_k nu(k,n) = S(n), n <= 200");
    add_check(r, s, "weight-sum-corrected-closed-form", wsum_ok,
              wsum_ok ? "identical (exact)" : "differ",
              "sum_k W(k,n) = [(1-2p)(2-3p) - 2p(1+p)(p-1)^n]/(2-p)");
    add_check(r, s, "weight-sum-printed-form", claimed_worst <= 1e-12,
              detail::text_of(claimed_worst), "rel deviation <= 1e-12",
              "the printed closed form (1-2p)(2-3p)/(2-p) - 2p(p-1)^n disagrees "
              "with direct summation; kept for the record, see the corrected "
              "variant above",
              false);

    bool float_forms_ok = true;
    for (int i = 1; i <= 19 && float_forms_ok; ++i) {
        double pd = i / 20.0;
        for (long long n = 1; n <= 200 && float_forms_ok; ++n) {
            double a = S_closed(pd, n), b = S_recursive(pd, n), acc = 0;
            for (long long k = (n + 1) / 2; k <= n; ++k) acc += nu(pd, k, n);
            float_forms_ok = std::fabs(a - b) <= 1e-12 * std::fabs(a) &&
                             std::fabs(acc - a) <= 1e-12 * std::fabs(a);
        }
    }
    add_check(r, s, "row-mass-identities-float", float_forms_ok,
              float_forms_ok ? "within 1e-12 relative" : "drift above 1e-12",
              "double-precision row-mass identities, n <= 200");

    bool horizon_ok = true, contraction_ok = true;
    for (const rational& pr : detail::twenty_grid()) {
        probability p;
        p.exact = pr;
        p.text = format_rational(pr);
        p.from_fraction = true;
        auto series = correlation_series(p, 512);
        auto horizon = decay_horizon(series.values, p.as_double());
        horizon_ok = horizon_ok && horizon.horizon > 0;
        auto report = decay_contraction_report(series.values, p.as_double());
        contraction_ok = contraction_ok && !report.any_violation;
    }
    add_check(r, s, "decay-horizon-reached", horizon_ok,
              horizon_ok ? "finite horizon on the whole grid" : "no horizon",
              "|C| falls below 1e-3, directly or by dyadic certificate");
    add_check(r, s, "contraction-bounds-hold", contraction_ok,
              contraction_ok ? "no violations" : "violation found",
              "half-window ratio <= alpha(p) + eps_p(n) for n >= 4");
}

// --------------------------------------------------------------------------
// concentration: tail bound, factorial sandwich, mass identity.

inline void verify_concentration(VerifyReport& r) {
    using detail::add_check;
    const std::string s = "concentration";
    precision_guard guard(256);

    bool delta_ok = true, mass_ok = true;
    double worst_ratio = 0;
    for (double p : {0.1, 0.3, 0.7}) {
        for (long long n : {1000ll, 10000ll, 100000ll}) {
            auto tail = concentration_tail(p, n, 2.0, 1.0);
            delta_ok = delta_ok && tail.delta_n <= tail.bound;
            worst_ratio = std::max(worst_ratio, tail.delta_n / tail.bound);
            big_float total = tail.tail_mass + tail.window_mass;
            big_float closed = S_closed(big_float(p), n);
            big_float rel = abs(total - closed) / closed;
            mass_ok = mass_ok && rel <= big_float(1e-60);
        }
    }
    add_check(r, s, "tail-mass-within-power-bound", delta_ok, detail::text_of(worst_ratio),
              "delta_n / n^{-(beta-b)/2} <= 1 at (b, beta) = (1, 2)");
    add_check(r, s, "window-plus-tail-equals-row-mass", mass_ok,
              mass_ok ? "<= 1e-60 relative" : "above 1e-60",
              "exact split of the nu row mass");

    bool sandwich_ok = true;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        big_float pw(p);
        for (long long n = 3; n <= 40 && sandwich_ok; ++n) {
            for (long long k = (n + 1) / 2; k <= n && sandwich_ok; ++k) {
                auto bounds = robbins_bounds(p, n, k);
                big_float value = nu(pw, k + 1, n + 1);
                if (2 * k > n && k < n) {
                    sandwich_ok = bounds.lo <= value && value <= bounds.hi;
                } else {
                    // at the window edges both bounds collapse onto the weight
                    big_float rel = abs(value - bounds.lo) / value;
                    sandwich_ok = bounds.lo == bounds.hi && rel <= big_float(1e-12);
                }
            }
        }
    }
    add_check(r, s, "factorial-sandwich-brackets-nu", sandwich_ok,
              sandwich_ok ? "all weights inside" : "weight escaped",
              "nu(k+1, n+1) within two-sided refined Stirling bounds, n <= 40");
}

// --------------------------------------------------------------------------
// windows: sign structure of the kernel across the concentration window.

inline void verify_windows(VerifyReport& r) {
    using detail::add_check;
    const std::string s = "windows";

    for (double p : {0.1, 0.3, 0.8}) {
        auto scan = window_sign_scan(p, 500);
        bool ok = scan.sign == WindowSign::all_positive;
        add_check(r, s, "all-positive-n500-p=" + detail::brief(p), ok,
                  ok ? "all positive"
                     : std::to_string(scan.positives) + "+/" + std::to_string(scan.negatives) + "-",
                  "every kernel weight positive on [l(n), u(n)]");
    }

    for (double p : {0.55, 0.6}) {
        auto scan = window_sign_scan(p, 4096, 2.0);
        bool ok = scan.sign == WindowSign::all_negative;
        add_check(r, s, "all-negative-n4096-p=" + detail::brief(p), ok,
                  ok ? "all negative"
                     : std::to_string(scan.positives) + "+/" + std::to_string(scan.negatives) + "-",
                  "every kernel weight negative on [l(n), u(n)] at beta = 2");

        auto printed = window_sign_scan(p, 500);
        bool neg500 = printed.sign == WindowSign::all_negative;
        add_check(r, s, "printed-negative-n500-p=" + detail::brief(p), neg500,
                  std::to_string(printed.positives) + "+/" + std::to_string(printed.negatives) +
                      "-",
                  "all negative at n = 500",
                  "the stated sign pattern does not hold yet at n = 500; the window "
                  "is still mixed there and turns all-negative only for larger n "
                  "(see the n = 4096 check)",
                  false);
    }
}

// --------------------------------------------------------------------------
// fixedpoints: window fixed-point constants and the iterated sandwich.

inline void verify_fixedpoints(VerifyReport& r) {
    using detail::add_check;
    const std::string s = "fixedpoints";
    precision_guard guard(256);

    double beta03 = lower_bound_exponent(0.3) + 1.0;
    auto qr = qr_constants(0.3, 1e8, beta03);
    bool resid_ok = qr.q_residual <= big_float(1e-12) && qr.r_residual <= big_float(1e-12);
    add_check(r, s, "fixed-point-residuals", resid_ok,
              detail::text_of(qr.q_residual) + " / " + detail::text_of(qr.r_residual),
              "both residuals <= 1e-12 at p = 0.3, x = 1e8");
    bool near_one = static_cast<double>(1 - qr.Q) <= 0.01 && static_cast<double>(qr.R - 1) <= 0.01;
    add_check(r, s, "constants-within-one-percent", near_one,
              "Q = " + detail::text_of(qr.Q) + ", R = " + detail::text_of(qr.R),
              "1 - Q <= 0.01 and R - 1 <= 0.01");

    auto qr4 = qr_constants(0.3, 1e4, beta03);
    auto qr12 = qr_constants(0.3, 1e12, beta03);
    bool mono = qr4.Q < qr.Q && qr.Q < qr12.Q && qr12.R < qr.R;
    add_check(r, s, "constants-tighten-with-x", mono,
              mono ? "Q increasing, R decreasing" : "not monotone",
              "Q(1e4) < Q(1e8) < Q(1e12), R(1e12) < R(1e8)");

    bool sandwich = true;
    for (double p : {0.1, 0.3, 0.45, 0.7}) {
        double beta = lower_bound_exponent(p) + 1.0;
        big_float lam = big_float(2) - big_float(p);
        for (double xe : {1e4, 1e6, 1e8}) {
            auto qrx = qr_constants(p, xe, beta);
            for (int k : {1, 5, 10, 20}) {
                big_float lo_it = int_pow(lam, static_cast<unsigned long long>(k)) * big_float(xe);
                big_float hi_it = lo_it;
                for (int j = 1; j <= k && sandwich; ++j) {
                    lo_it = iterate_window_lo(p, lo_it, 1, beta);
                    hi_it = iterate_window_hi(p, hi_it, 1, beta);
                    big_float scale =
                        int_pow(lam, static_cast<unsigned long long>(k - j)) * big_float(xe);
                    sandwich = qrx.Q * scale <= lo_it && lo_it <= hi_it && hi_it <= qrx.R * scale;
                }
            }
        }
    }
    add_check(r, s, "iterated-window-sandwich", sandwich,
              sandwich ? "inside for all j <= k <= 20" : "escaped",
              "Q lambda^{k-j} x <= l^j(lambda^k x) <= u^j(lambda^k x) <= R lambda^{k-j} x");
}

// --------------------------------------------------------------------------
// appendixE: the small-p lower-bound chain.

inline void verify_appendixE(VerifyReport& r) {
    using detail::add_check;
    const std::string s = "appendixE";

    auto report = verify_lower_bound();
    double alpha = report.alpha_at_25;
    add_check(r, s, "alpha_110_25", std::fabs(alpha - 1.0999111) <= 1e-6, detail::text_of(alpha),
              "1.0999111 +- 1e-6");

    // The literal display reads (p-1)^n where the chain needs (1-p)^n; at
    // n = 25 the literal sign flips the oscillation term.
    {
        double p = 0.1, b = lower_bound_exponent(p);
        double base = (1.0 - 2.0 * p) * (2.0 - 3.0 * p) / (2.0 - p);
        double osc_literal = 2.0 * p * std::pow(p - 1.0, 25.0);
        double spike = std::pow(2.0, b - 2.0) * std::pow(25.0 / 3.0, 1.0 + b) *
                       std::pow(4.0 * p * (1.0 - p), 8.0);
        double denom = 1.0 + std::pow(p, 26.0) * (1.0 - 2.0 * p);
        double literal = (base - osc_literal - spike) / denom * std::pow(1.5, b);
        add_check(r, s, "alpha-display-read-literally",
                  std::fabs(literal - 1.0999111) <= 1e-6, detail::text_of(literal),
                  "1.0999111 +- 1e-6",
                  "evaluating the display with (p-1)^n as printed overshoots the "
                  "quoted constant; the (1-p)^n reading reproduces it",
                  false);
    }

    bool band_ok = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& e : report.entries) {
        band_ok = band_ok && e.band_ok;
        worst_margin = std::min(worst_margin, e.band_margin);
    }
    add_check(r, s, "lower-bound-band", band_ok, detail::text_of(worst_margin),
              "C_p(n) n^{b_p} >= 1 on 12 <= n <= 37, p = 0.01 .. 0.10");

    add_check(r, s, "alpha-monotone-in-n", report.alpha_increases_with_n,
              report.alpha_increases_with_n ? "increasing" : "not increasing",
              "alpha_{1/10}(n) increases for n >= 25");
    add_check(r, s, "alpha-monotone-in-p", report.alpha_decreases_with_p,
              report.alpha_decreases_with_p ? "decreasing" : "not decreasing",
              "alpha_p(25) decreases on p = 0.01 .. 0.10");

    bool induction_ok = true;
    for (const auto& e : report.entries) induction_ok = induction_ok && e.induction_max_n >= 10000;
    add_check(r, s, "induction-extends-the-band", induction_ok,
              induction_ok ? ">= 10000 on the whole grid" : "stalled early",
              "step factor stays >= 1 up to the scan cap");

    bool interp_ok = true;
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        std::vector<long long> expected;
        if (i <= 8) expected.push_back(1);
        if (i <= 6) expected.push_back(24);
        interp_ok = interp_ok && report.entries[i].interpolation_failures == expected;
    }
    add_check(r, s, "interpolation-exception-set", interp_ok,
              interp_ok ? "exactly {1 for p <= 0.09} & {24 for p <= 0.07}" : "unexpected set",
              "the p-interpolation surrogate fails only at the known hairline points");

    std::ostringstream concavity;
    concavity << "p=0.01: " << report.entries[0].concavity_exceptions.size()
              << " points, p=0.10: " << report.entries[9].concavity_exceptions.size()
              << " points";
    add_check(r, s, "in-n-concavity-exceptions", true, concavity.str(),
              "informational scan",
              "log-concavity in n genuinely fails at most even n for small p; "
              "recorded per entry in the lower-bound report",
              false);
}

inline VerifyReport run_verify_suite(const std::string& suite) {
    VerifyReport report;
    bool all = suite == "all";
    if (all || suite == "marginals") verify_marginals(report);
    if (all || suite == "recurrence") verify_recurrence(report);
    if (all || suite == "concentration") verify_concentration(report);
    if (all || suite == "windows") verify_windows(report);
    if (all || suite == "fixedpoints") verify_fixedpoints(report);
    if (all || suite == "appendixE") verify_appendixE(report);
    if (report.checks.empty()) throw std::invalid_argument("unknown verification suite '" + suite + "'");
    return report;
}

}  // namespace expmod
