#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "correlation.hpp"
#include "nu_weights.hpp"
#include "numeric.hpp"
#include "threads.hpp"

// Asymptotic power-law theory for the correlation decay: the theoretical
// exponent, log-log fitting, the concentration/window machinery that backs
// the rigorous scaling argument, fixed-point window constants, the low-p
// lower-bound verifier, the positivity threshold estimate, and the power
// spectrum of the correlation sequence.

namespace expmod {

// ---------------------------------------------------------------------------
// Theoretical exponent: C_p(n) ~ n^{-beta(p)} on (0,1/2) u (2/3,1).

struct BetaExponent {
    double value = std::numeric_limits<double>::quiet_NaN();
    bool valid = false;             // true on (0,1/2) u (2/3,1)
    bool singular_adjacent = false; // true on (1/2,2/3): the prefactor
                                    // (1-2p)(2-3p) is negative there
};

inline BetaExponent beta_exponent(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("beta exponent needs p in (0,1)");
    if (p == 0.5 || p == 2.0 / 3.0)
        throw std::domain_error("no power law at p = " + std::to_string(p) +
                                ": the correlation decays faster than any power");
    BetaExponent out;
    // Taking the log of the product keeps the formula real on (2/3,1)
    // where both factors are negative.
    double prod = (1.0 - 2.0 * p) * (2.0 - 3.0 * p);
    if (prod <= 0.0) {
        out.singular_adjacent = true;
        return out;
    }
    out.value = (std::log(2.0 - p) - std::log(prod)) / std::log(2.0 - p);
    out.valid = true;
    return out;
}

// Spectral counterpart: the power spectrum of the correlation sequence
// scales as omega^{-(1 - beta(p))}.
inline double spectral_exponent_target(double p) { return 1.0 - beta_exponent(p).value; }

// Empirical lower-bound exponent line: C_p(n) >= n^{-lower_bound_exponent(p)}
// on the verified band for small p.
inline double lower_bound_exponent(double p) { return 0.60206 + 5.62823 * p; }

// ---------------------------------------------------------------------------
// Log-log least squares.

struct PowerLawFit {
    double slope = 0;
    double intercept = 0;
    double residual = 0;  // root-mean-square log-log residual
    long long n_lo = 0;
    long long n_hi = 0;
    long long points = 0;
};

struct ScalingReport {
    probability p;
    double beta_theoretical = std::numeric_limits<double>::quiet_NaN();
    bool beta_valid = false;
    PowerLawFit fit;
};

namespace detail {

inline double log_as_double(double v) { return std::log(v); }
inline double log_as_double(const big_float& v) { return static_cast<double>(log(v)); }

inline PowerLawFit ols_loglog(const std::vector<double>& lx, const std::vector<double>& ly,
                              long long n_lo, long long n_hi) {
    PowerLawFit out;
    out.n_lo = n_lo;
    out.n_hi = n_hi;
    out.points = static_cast<long long>(lx.size());
    if (lx.size() < 2) throw std::invalid_argument("power-law fit needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(ly.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        double r = ly[i] - (out.intercept + out.slope * lx[i]);
        rss += r * r;
    }
    out.residual = std::sqrt(rss / static_cast<double>(lx.size()));
    return out;
}

}  // namespace detail

// Ordinary least squares on (log n, log C(n)) over n in [n_lo, n_hi].
// Every value on the window must be positive; the first offender is named.
template <class T>
PowerLawFit fit_power_law(const std::vector<T>& values, long long n_lo, long long n_hi) {
    if (n_lo < 1 || n_hi <= n_lo || n_hi >= static_cast<long long>(values.size()))
        throw std::invalid_argument("fit window out of range");
    std::vector<double> lx, ly;
    lx.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
    ly.reserve(lx.capacity());
    for (long long n = n_lo; n <= n_hi; ++n) {
        const T& v = values[static_cast<std::size_t>(n)];
        if (!(v > 0))
            throw std::domain_error("non-positive series value inside the fit window at n = " +
                                    std::to_string(n));
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(detail::log_as_double(v));
    }
    return detail::ols_loglog(lx, ly, n_lo, n_hi);
}

// Same fit on |C(n)|, skipping exact zeros. This is the estimator used for
// the full exponent sweep: past the positivity threshold the series
// alternates in sign while |C| still follows the power law.
template <class T>
PowerLawFit fit_power_law_magnitude(const std::vector<T>& values, long long n_lo, long long n_hi) {
    if (n_lo < 1 || n_hi <= n_lo || n_hi >= static_cast<long long>(values.size()))
        throw std::invalid_argument("fit window out of range");
    std::vector<double> lx, ly;
    for (long long n = n_lo; n <= n_hi; ++n) {
        T v = values[static_cast<std::size_t>(n)];
        if (v < 0) v = -v;
        if (!(v > 0)) continue;
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(detail::log_as_double(v));
    }
    return detail::ols_loglog(lx, ly, n_lo, n_hi);
}

inline ScalingReport fit_scaling(const CorrelationSeries& series, long long n_lo, long long n_hi,
                                 bool magnitudes = false) {
    ScalingReport out{series.p, std::numeric_limits<double>::quiet_NaN(), false, {}};
    double pd = series.p.as_double();
    if (pd != 0.5 && pd != 2.0 / 3.0) {
        auto b = beta_exponent(pd);
        out.beta_theoretical = b.value;
        out.beta_valid = b.valid;
    }
    out.fit = magnitudes ? fit_power_law_magnitude(series.values, n_lo, n_hi)
                         : fit_power_law(series.values, n_lo, n_hi);
    return out;
}

// ---------------------------------------------------------------------------
// Large-deviation rate function for the substitution-length concentration.

// I_p(q) = q/(q+1) log(q/(1-p)) + (1-q)/(q+1) log((1-q)/p), continuously
// extended to the endpoints: I_p(0) = log(1/p), I_p(1) = log(1/(1-p))/2.
// Nonnegative, strictly convex, vanishing only at q = 1-p.
inline double rate_I(double p, double q) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("rate function needs p in (0,1)");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("rate function argument outside [0,1]");
    if (q == 0.0) return std::log(1.0 / p);
    if (q == 1.0) return 0.5 * std::log(1.0 / (1.0 - p));
    return q / (q + 1.0) * std::log(q / (1.0 - p)) +
           (1.0 - q) / (q + 1.0) * std::log((1.0 - q) / p);
}

// ---------------------------------------------------------------------------
// Concentration width and resulting window around the mean expansion rate.

// d(x) = sqrt(p(1-p)(2-p)(beta+1) log(x) / x)
inline double concentration_width(double p, double x, double beta_param) {
    if (!(x > 1.0)) throw std::invalid_argument("concentration width needs x > 1");
    return std::sqrt(p * (1.0 - p) * (2.0 - p) * (beta_param + 1.0) * std::log(x) / x);
}

struct WindowSpec {
    double p = 0;
    double beta_param = 0;
    double d = 0;   // concentration width at this n
    double lo = 0;  // ell(n) = n / (2 - p + d)
    double hi = 0;  // u(n)   = n / (2 - p - d)
};

inline WindowSpec make_window(double p, double x, double beta_param) {
    WindowSpec w;
    w.p = p;
    w.beta_param = beta_param;
    w.d = concentration_width(p, x, beta_param);
    if (w.d >= 2.0 - p)
        throw std::range_error("window degenerate: concentration width reaches 2 - p");
    w.lo = x / (2.0 - p + w.d);
    w.hi = x / (2.0 - p - w.d);
    return w;
}

// delta_n = n^b * (nu-mass of k in [ceil(n/2), n] with |n/k - (2-p)| > d(n)),
// claimed <= n^{-(beta-b)/2} for large n. Requires beta > b or the bound
// diverges. The mass is summed directly in extended precision (the row start
// nu(k0, n) underflows double arithmetic long before n = 1e5).
struct ConcentrationTail {
    double delta_n = 0;
    double bound = 0;
    big_float tail_mass;
    big_float window_mass;
};

inline ConcentrationTail concentration_tail(double p, long long n, double beta_param, double b) {
    if (!(beta_param > b && b > 0)) throw std::invalid_argument("concentration needs beta > b > 0");
    if (n < 4) throw std::invalid_argument("concentration tail needs n >= 4");
    precision_guard guard(256);
    ConcentrationTail out;
    double d = concentration_width(p, static_cast<double>(n), beta_param);
    big_float pw(p), q = big_float(1) - pw;
    long long k0 = (n + 2) / 2;  // smallest k with nu(k,n) != 0
    big_float v;
    if (n % 2 == 1) {
        v = int_pow(q, static_cast<unsigned long long>((n - 1) / 2));
    } else {
        v = big_float(n / 2) * int_pow(q, static_cast<unsigned long long>(n / 2 - 1)) * pw;
    }
    big_float tail(0), window(0);
    big_float p2_over_q = pw * pw / q;
    for (long long k = k0; k <= n; ++k) {
        if (std::fabs(static_cast<double>(n) / static_cast<double>(k) - (2.0 - p)) > d)
            tail += v;
        else
            window += v;
        if (k < n) {
            v *= p2_over_q;
            v *= big_float(static_cast<double>(k) * static_cast<double>(n - k));
            v /= big_float(static_cast<double>(2 * k - n + 1) * static_cast<double>(2 * k - n));
        }
    }
    out.tail_mass = tail;
    out.window_mass = window;
    out.delta_n = static_cast<double>(big_float(pow(big_float(n), big_float(b))) * tail);
    out.bound = std::pow(static_cast<double>(n), -(beta_param - b) / 2.0);
    return out;
}

// ---------------------------------------------------------------------------
// Refined Stirling (factorial sandwich) bounds for individual nu weights.

// Bounds for nu_p(k+1, n+1) built from the two-sided factorial refinement
// sqrt(2 pi n) n^n e^{-n + 1/(12n+1)} <= n! <= sqrt(2 pi n) n^n e^{-n + 1/(12n)}.
// On the strict interior n/2 < k < n both bounds carry the prefactor
// e^{+-eps}/sqrt(2 pi k (n/k-1)(2-n/k)) with eps = 1/(4 min(n-k, 2k-n));
// at k = n/2 (n even) and k = n the sandwich collapses to an equality.
struct RobbinsBounds {
    big_float lo;
    big_float hi;
};

inline RobbinsBounds robbins_bounds(double p, long long n, long long k) {
    if (n < 3 || k < (n + 1) / 2 || k > n)
        throw std::invalid_argument("factorial sandwich needs n >= 3 and k in [ceil(n/2), n]");
    precision_guard guard(256);
    big_float nn(n), kk(k);
    double q = static_cast<double>(n) / static_cast<double>(k) - 1.0;
    big_float core = exp(big_float(-static_cast<double>(n)) * big_float(rate_I(p, q)));
    RobbinsBounds out;
    if (2 * k > n && k < n) {
        big_float eps = big_float(1) / big_float(4 * std::min(n - k, 2 * k - n));
        big_float pi_v = 4 * atan(big_float(1));
        big_float base = sqrt(2 * pi_v * kk * (nn / kk - 1) * (2 - nn / kk));
        out.lo = core * exp(-eps) / base;
        out.hi = core * exp(eps) / base;
    } else {
        out.lo = core;
        out.hi = core;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sign of the recurrence weights across the concentration window.

enum class WindowSign { all_positive, all_negative, mixed };

struct WindowScan {
    long long n = 0;
    long long k_lo = 0;
    long long k_hi = 0;
    long long positives = 0;
    long long negatives = 0;
    WindowSign sign = WindowSign::mixed;
};

// Evaluates the recurrence weight at every integer k in [ceil(ell(n)),
// floor(u(n))]. beta_param <= 0 selects the default lower_bound_exponent(p)+1.
inline WindowScan window_sign_scan(double p, long long n, double beta_param = 0) {
    if (beta_param <= 0) beta_param = lower_bound_exponent(p) + 1.0;
    WindowSpec w = make_window(p, static_cast<double>(n), beta_param);
    long long k_lo = static_cast<long long>(std::ceil(w.lo));
    long long k_hi = static_cast<long long>(std::floor(w.hi));
    if (k_lo > k_hi) throw std::range_error("empty weight window at n = " + std::to_string(n));
    precision_guard guard(256);
    WindowScan out;
    out.n = n;
    out.k_lo = k_lo;
    out.k_hi = k_hi;
    big_float pw(p);
    for (long long k = k_lo; k <= k_hi; ++k) {
        big_float val = weight_W(pw, k, n);
        if (val > 0)
            ++out.positives;
        else if (val < 0)
            ++out.negatives;
    }
    if (out.positives > 0 && out.negatives == 0)
        out.sign = WindowSign::all_positive;
    else if (out.negatives > 0 && out.positives == 0)
        out.sign = WindowSign::all_negative;
    else
        out.sign = WindowSign::mixed;
    return out;
}

// ---------------------------------------------------------------------------
// Fixed-point window constants.

// Q(x) is the largest solution of  Q = exp(-d(x) S / (sqrt(Q) lambda)),
// R(x) the smallest solution of    R = exp(+d(x) S / (sqrt(R) lambda)),
// with lambda = 2-p and S = sum_{m>=0} sqrt((m+1) lambda^{-m}).
struct QRConstants {
    big_float Q;
    big_float R;
    big_float series_sum;
    big_float d;
    big_float q_residual;
    big_float r_residual;
};

inline QRConstants qr_constants(double p, double x, double beta_param) {
    precision_guard guard(256);
    QRConstants out;
    big_float lam = big_float(2) - big_float(p);
    out.d = big_float(concentration_width(p, x, beta_param));
    // Geometric-rate series, summed to relative tolerance 1e-15.
    big_float S(0);
    big_float inv_lam = 1 / lam, lam_pow(1);
    for (unsigned long long m = 0;; ++m) {
        big_float term = sqrt(big_float(m + 1) * lam_pow);
        S += term;
        if (term < S * 1e-15) break;
        lam_pow *= inv_lam;
        if (m > 100000) throw numeric_failure("window constant series failed to converge");
    }
    out.series_sum = S;
    big_float c = out.d * S / lam;
    // In t = sqrt(Q) the fixed point reads 2 t log t = -c; the left side has
    // minimum -2/e on (0,1), so no solution exists once c exceeds 2/e.
    if (c > 2 / exp(big_float(1)))
        throw std::domain_error("no window fixed point in (0,1] at x = " + format_float(x) +
                                ": the concentration width is too large");
    auto damped = [&](bool upper) {
        big_float v(1);
        for (int it = 0; it < 500; ++it) {
            big_float next = upper ? exp(c / sqrt(v)) : exp(-c / sqrt(v));
            big_float step = (next - v) / 2;
            v += step;
            big_float mag = step < 0 ? big_float(-step) : step;
            if (mag < v * 1e-40) break;
        }
        return v;
    };
    out.Q = damped(false);
    out.R = damped(true);
    big_float rq = out.Q - exp(-c / sqrt(out.Q));
    big_float rr = out.R - exp(c / sqrt(out.R));
    out.q_residual = rq < 0 ? big_float(-rq) : rq;
    out.r_residual = rr < 0 ? big_float(-rr) : rr;
    if (out.q_residual > 1e-12 || out.r_residual > 1e-12)
        throw numeric_failure("window fixed-point iteration did not reach tolerance");
    return out;
}

// j-fold iterates of the window maps, for the sandwich
// Q(x) lambda^{k-j} x <= ell^j(lambda^k x) <= u^j(lambda^k x) <= R(x) lambda^{k-j} x.
inline big_float iterate_window_lo(double p, big_float y, int j, double beta_param) {
    precision_guard guard(256);
    big_float lam = big_float(2) - big_float(p);
    for (int i = 0; i < j; ++i) {
        big_float d = sqrt(big_float(p) * (1 - big_float(p)) * lam * (beta_param + 1) * log(y) / y);
        y = y / (lam + d);
    }
    return y;
}

inline big_float iterate_window_hi(double p, big_float y, int j, double beta_param) {
    precision_guard guard(256);
    big_float lam = big_float(2) - big_float(p);
    for (int i = 0; i < j; ++i) {
        big_float d = sqrt(big_float(p) * (1 - big_float(p)) * lam * (beta_param + 1) * log(y) / y);
        y = y / (lam - d);
    }
    return y;
}

// ---------------------------------------------------------------------------
// Low-p lower-bound verifier.

// Scaled lower-bound factor for the induction step: when every C_p(k) on
// [n/2, 2n/3) already dominates k^{-b_p}, C_p(n) >= alpha_factor(p,n) n^{-b_p}.
// The weight-sum term enters through the valid lower bound
//   sum_k W >= (1-2p)(2-3p)/(2-p) - 2p(1-p)^n   (p <= 1/2),
// which absorbs the alternating-sign corrected identity since
// 2p(1+p)(1-p)^n/(2-p) <= 2p(1-p)^n exactly when 1+p <= 2-p.
inline double alpha_factor(double p, long long n) {
    double b = lower_bound_exponent(p);
    double base = (1.0 - 2.0 * p) * (2.0 - 3.0 * p) / (2.0 - p);
    double osc = 2.0 * p * std::pow(1.0 - p, static_cast<double>(n));
    double spike = std::pow(2.0, b - 2.0) * std::pow(static_cast<double>(n) / 3.0, 1.0 + b) *
                   std::pow(4.0 * p * (1.0 - p), (static_cast<double>(n) - 1.0) / 3.0);
    double denom = 1.0 + std::pow(p, static_cast<double>(n) + 1.0) * (1.0 - 2.0 * p);
    return (base - osc - spike) / denom * std::pow(1.5, b);
}

struct LowerBoundEntry {
    double p = 0;
    bool band_ok = false;          // C_p(n) >= n^{-b_p} on 12 <= n <= 37
    double band_margin = 0;        // min over the band of C_p(n) n^{b_p}
    bool interpolation_ok = false; // log C_p(n) >= -log 4 + 10p log(4 C_{1/10}(n))
    std::vector<long long> interpolation_failures;
    std::vector<long long> concavity_exceptions;  // n with C(n)^2 < C(n-1) C(n+1)
    long long induction_max_n = 0;                // largest n with the step factor >= 1 throughout
};

struct LowerBoundReport {
    double alpha_at_25 = 0;  // alpha_factor(1/10, 25)
    bool alpha_increases_with_n = false;
    bool alpha_decreases_with_p = false;
    std::vector<LowerBoundEntry> entries;
};

// Verifies the small-p lower-bound chain on a probability grid (defaults to
// 0.01..0.10). Failures land in the report; nothing throws.
inline LowerBoundReport verify_lower_bound(std::vector<probability> grid = {},
                                           long long induction_cap = 10000) {
    if (grid.empty())
        for (int i = 1; i <= 10; ++i)
            grid.push_back(parse_probability(i == 10 ? std::string("0.10")
                                                     : "0.0" + std::to_string(i)));
    LowerBoundReport report;
    report.alpha_at_25 = alpha_factor(0.1, 25);

    bool mono_n = true, mono_p = true;
    for (long long n = 25; n < 40; ++n)
        if (alpha_factor(0.1, n + 1) <= alpha_factor(0.1, n)) mono_n = false;
    for (int i = 1; i < 10; ++i)
        if (alpha_factor(0.01 * (i + 1), 25) >= alpha_factor(0.01 * i, 25)) mono_p = false;
    report.alpha_increases_with_n = mono_n;
    report.alpha_decreases_with_p = mono_p;

    auto ref = correlation_series(parse_probability("1/10"), 25);
    report.entries.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t gi) {
        precision_guard guard(256);
        const probability& p = grid[gi];
        LowerBoundEntry e;
        e.p = p.as_double();
        auto series = correlation_series(p, 38);
        double b = lower_bound_exponent(e.p);
        double margin = std::numeric_limits<double>::infinity();
        for (long long n = 12; n <= 37; ++n) {
            double c = static_cast<double>(series.values[static_cast<std::size_t>(n)]);
            margin = std::min(margin, c * std::pow(static_cast<double>(n), b));
        }
        e.band_margin = margin;
        e.band_ok = margin >= 1.0;

        for (long long n = 1; n <= 25; ++n) {
            big_float lhs = log(series.values[static_cast<std::size_t>(n)]);
            big_float rhs = -log(big_float(4)) +
                            10 * big_float(e.p) * log(4 * ref.values[static_cast<std::size_t>(n)]);
            if (lhs < rhs - big_float(1e-30)) e.interpolation_failures.push_back(n);
        }
        e.interpolation_ok = e.interpolation_failures.empty();

        for (long long n = 1; n + 1 <= 37; ++n) {
            const auto& c0 = series.values[static_cast<std::size_t>(n - 1)];
            const auto& c1 = series.values[static_cast<std::size_t>(n)];
            const auto& c2 = series.values[static_cast<std::size_t>(n + 1)];
            if (c1 * c1 < c0 * c2) e.concavity_exceptions.push_back(n);
        }

        e.induction_max_n = 37;
        if (e.band_ok) {
            long long n = 38;
            while (n <= induction_cap && alpha_factor(e.p, n) >= 1.0) ++n;
            e.induction_max_n = n - 1;
        }
        report.entries[gi] = e;
    });
    return report;
}

// ---------------------------------------------------------------------------
// Positivity threshold.

struct PStarEstimate {
    double value = 0;
    double bracket_lo = 0;
    double bracket_hi = 0;
    long long n_max = 0;
    // The predicate only checks n <= n_max, so this is an upper surrogate:
    // the true threshold can only be lower than the reported value.
    bool truncated = true;
};

inline bool positive_up_to(const rational& p, long long n_max) {
    probability prob;
    prob.exact = p;
    prob.text = format_rational(p);
    prob.from_fraction = true;
    auto series = correlation_series(prob, n_max);
    for (long long n = 1; n <= n_max; ++n)
        if (!(series.values[static_cast<std::size_t>(n)] > 0)) return false;
    return true;
}

inline PStarEstimate p_star_estimate(long long n_max = 500, int bisection_steps = 22) {
    if (n_max < 100) throw std::invalid_argument("positivity threshold needs n_max >= 100");
    rational lo(1, 5), hi(2, 5);
    if (!positive_up_to(lo, n_max) || positive_up_to(hi, n_max))
        throw numeric_failure("positivity bracket [0.2, 0.4] failed to straddle the threshold");
    for (int i = 0; i < bisection_steps; ++i) {
        rational mid = (lo + hi) / 2;
        (positive_up_to(mid, n_max) ? lo : hi) = mid;
    }
    PStarEstimate out;
    out.bracket_lo = lo.convert_to<double>();
    out.bracket_hi = hi.convert_to<double>();
    out.value = (out.bracket_lo + out.bracket_hi) / 2;
    out.n_max = n_max;
    return out;
}

// ---------------------------------------------------------------------------
// Power spectrum of the correlation sequence.

struct SpectrumReport {
    std::vector<double> omega;  // per-bin geometric mean frequency
    std::vector<double> power;  // per-bin geometric mean spectral value
    double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    long long points_used = 0;  // raw positive-frequency points kept
    double dc = 0;              // omega = 0 component
    double max_band_power = 0;  // largest |F| inside the fit band
};

// Transform convention: the window C(n_lo..n_hi) is extended evenly about
// both ends (period 2M, M = n_hi - n_lo), giving the real transform
// F_j = s_0 + s_M cos(pi j) + 2 sum_{m=1..M-1} s_m cos(pi j m / M) at
// omega_j = pi j / M. The fitted exponent comes from a least-squares line
// through per-bin mean logs over 12 log-spaced bins on [0.001 pi, 0.005 pi];
// fitting the raw unbinned points instead overweights the dense high end of
// the band and misses the synthetic-series exponent by a factor of two.
template <class T>
SpectrumReport power_spectrum(const std::vector<T>& values, long long n_lo, long long n_hi,
                              int bins = 12, double band_lo = 0.001, double band_hi = 0.005) {
    if (n_lo < 0 || n_hi <= n_lo || n_hi >= static_cast<long long>(values.size()))
        throw std::invalid_argument("spectrum window out of range");
    long long M = n_hi - n_lo;
    if (M + 1 < 64) throw std::range_error("spectrum window shorter than 64 points");
    std::vector<double> s(static_cast<std::size_t>(M) + 1);
    for (long long m = 0; m <= M; ++m)
        s[static_cast<std::size_t>(m)] = static_cast<double>(values[static_cast<std::size_t>(n_lo + m)]);

    SpectrumReport out;
    out.dc = s[0] + s[static_cast<std::size_t>(M)];
    for (long long m = 1; m < M; ++m) out.dc += 2.0 * s[static_cast<std::size_t>(m)];

    long long j_lo = std::max<long long>(1, static_cast<long long>(std::ceil(band_lo * static_cast<double>(M))));
    long long j_hi = static_cast<long long>(std::floor(band_hi * static_cast<double>(M)));
    if (j_hi > M) j_hi = M;
    if (j_hi < j_lo) throw std::range_error("spectrum band contains no frequencies");

    std::vector<double> F(static_cast<std::size_t>(j_hi - j_lo + 1));
    parallel_for(F.size(), [&](std::size_t idx) {
        long long j = j_lo + static_cast<long long>(idx);
        double acc = s[0] + s[static_cast<std::size_t>(M)] * std::cos(M_PI * static_cast<double>(j));
        double w = M_PI * static_cast<double>(j) / static_cast<double>(M);
        for (long long m = 1; m < M; ++m)
            acc += 2.0 * s[static_cast<std::size_t>(m)] * std::cos(w * static_cast<double>(m));
        F[idx] = acc;
    });

    double log_lo = std::log(band_lo * M_PI), log_hi = std::log(band_hi * M_PI);
    std::vector<double> sum_lx(static_cast<std::size_t>(bins), 0), sum_ly(static_cast<std::size_t>(bins), 0);
    std::vector<long long> count(static_cast<std::size_t>(bins), 0);
    for (std::size_t idx = 0; idx < F.size(); ++idx) {
        long long j = j_lo + static_cast<long long>(idx);
        double om = M_PI * static_cast<double>(j) / static_cast<double>(M);
        if (om < band_lo * M_PI || om > band_hi * M_PI) continue;
        out.max_band_power = std::max(out.max_band_power, std::fabs(F[idx]));
        if (!(F[idx] > 0)) continue;
        int bin = static_cast<int>((std::log(om) - log_lo) / (log_hi - log_lo) * bins);
        if (bin == bins) bin = bins - 1;
        if (bin < 0 || bin >= bins) continue;
        sum_lx[static_cast<std::size_t>(bin)] += std::log(om);
        sum_ly[static_cast<std::size_t>(bin)] += std::log(F[idx]);
        ++count[static_cast<std::size_t>(bin)];
        ++out.points_used;
    }
    std::vector<double> lx, ly;
    for (int b = 0; b < bins; ++b) {
        if (count[static_cast<std::size_t>(b)] == 0) continue;
        double n = static_cast<double>(count[static_cast<std::size_t>(b)]);
        lx.push_back(sum_lx[static_cast<std::size_t>(b)] / n);
        ly.push_back(sum_ly[static_cast<std::size_t>(b)] / n);
        out.omega.push_back(std::exp(lx.back()));
        out.power.push_back(std::exp(ly.back()));
    }
    if (lx.size() >= 2) {
        auto fit = detail::ols_loglog(lx, ly, n_lo, n_hi);
        out.fitted_exponent = -fit.slope;
    }
    return out;
}

}  // namespace expmod
