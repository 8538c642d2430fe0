#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "marginal.hpp"
#include "nu_weights.hpp"
#include "numeric.hpp"

namespace expmod {

// Two-site correlation series C(n) = P{x_0 = x_n = 1} - 1/4 under the
// stationary measure, evaluated through the kernel recurrence
//   C(n) = [sum_{k<n} C(k) W(k,n)] / (1 + p^n (1-2p)),
// seeded with C(0) = 1/4 and C(1) = 1/(4(1+2p)).
//
// Evaluation cost is kept quadratic overall by carrying the full row dots
// E(m) = sum_k C(k) nu(k,m): the g and h kernel terms reuse E(n-1) and
// E(n-2) unchanged, so each step only has to accumulate one fresh nu row,
// built by upward ratio stepping (no factorials, no exponent underflow at
// extended precision).

template <class T>
T seed_correlation(const T& p) {
    return T(1) / (4 * (1 + 2 * p));
}

namespace detail {

// One fresh row: E'(n) = sum_{k0 <= k <= n-1} C(k) nu(k,n) with
// k0 = ceil((n+1)/2), plus the diagonal value nu(n,n) = p^(n-1) handled by
// the caller. Row values advance by
//   nu(k+1,n)/nu(k,n) = k(n-k) p^2 / ((1-p)(2k-n+1)(2k-n)).
template <class T>
T fresh_row_dot(const std::vector<T>& C, long long n, const T& p, const T& q,
                const T& p2_over_q) {
    long long k = (n + 2) / 2;
    T v = (n % 2 == 1) ? int_pow(q, static_cast<unsigned long long>((n - 1) / 2))
                       : T(n / 2) * int_pow(q, static_cast<unsigned long long>(n / 2 - 1)) * p;
    T acc(0);
    for (; k < n; ++k) {
        acc += C[static_cast<std::size_t>(k)] * v;
        v = v * p2_over_q;
        v = v * static_cast<unsigned long long>(k * (n - k));
        v = v / static_cast<unsigned long long>((2 * k - n + 1) * (2 * k - n));
    }
    return acc;
}

template <class T>
std::vector<T> series_values(const T& p, long long n_max) {
    const T q = T(1) - p;
    const T p2_over_q = p * p / q;
    WeightKernel<T> kernel(p);
    const T one_minus_2p = T(1) - 2 * p;
    std::vector<T> C, E;
    C.reserve(static_cast<std::size_t>(n_max) + 1);
    E.reserve(static_cast<std::size_t>(n_max) + 1);
    C.push_back(T(1) / 4);
    C.push_back(seed_correlation(p));
    E.push_back(T(0));     // row 0 is empty
    E.push_back(C[1]);     // row 1 holds only nu(1,1) = 1
    T p_pow = p;           // p^(n-1), advanced each step
    for (long long n = 2; n <= n_max; ++n) {
        T fresh = fresh_row_dot(C, n, p, q, p2_over_q);
        T numer = kernel.f * fresh + kernel.g * E[static_cast<std::size_t>(n - 1)] +
                  kernel.h * E[static_cast<std::size_t>(n - 2)];
        T denom = T(1) + p_pow * p * one_minus_2p;  // 1 + p^n (1-2p)
        T c = numer / denom;
        E.push_back(fresh + c * p_pow);
        C.push_back(std::move(c));
        p_pow = p_pow * p;
    }
    return C;
}

template <class T>
bool values_agree(const T& a, const T& b, double rel_tol) {
    if (a == b) return true;
    T diff = a < b ? b - a : a - b;
    T mag_a = a < 0 ? T(-a) : a;
    T mag_b = b < 0 ? T(-b) : b;
    return diff <= T(rel_tol) * (mag_a > mag_b ? mag_a : mag_b);
}

}  // namespace detail

// The recurrence needs C(1), which the defining material leaves implicit.
// The closed form is cross-checked against the order-1 stationary
// eigenvector every time a series is built, so a wrong seed derivation can
// never ship silently. Exact check for rational inputs, 1e-12 otherwise.
inline void validate_seed(const probability& p) {
    if (p.from_fraction) {
        auto mu = stationary_exact(build_transition<rational>(1, p.exact));
        rational from_chain =
            correlation_from_marginal(MarginalDistribution<rational>{1, mu}, 1);
        if (from_chain != seed_correlation(p.exact))
            throw numeric_failure("series seed disagrees with the order-1 eigenvector");
        return;
    }
    double pd = p.as_double();
    auto mu = stationary(build_transition<double>(1, pd)).distribution;
    double from_chain = correlation_from_marginal(mu, 1);
    if (std::fabs(from_chain - seed_correlation(pd)) > 1e-12)
        throw numeric_failure("series seed disagrees with the order-1 eigenvector");
}

struct CorrelationSeries {
    probability p;
    std::vector<big_float> values;  // index n = 0 .. n_max
    unsigned requested_bits = 0;    // working precision asked for
    unsigned verified_bits = 0;     // precision whose shadow run agreed
    double rel_tol = 0;
};

struct CorrelationSeriesExact {
    probability p;
    std::vector<rational> values;
};

inline constexpr long long default_exact_n_cap = 64;

// Exact rational series; the oracle mode. Denominators grow superlinearly,
// hence the modest default cap.
inline CorrelationSeriesExact correlation_series_exact(const probability& p, long long n_max,
                                                       long long n_cap = default_exact_n_cap) {
    if (!p.from_fraction) throw std::invalid_argument("exact series needs a rational probability");
    if (n_max < 2) throw std::invalid_argument("series horizon must be at least 2");
    if (n_max > n_cap) throw std::invalid_argument("exact series horizon exceeds the cap");
    validate_seed(p);
    return {p, detail::series_values(p.exact, n_max)};
}

// Extended-precision series with a shadow verification pass: the series is
// recomputed at doubled precision and every value must match to rel_tol.
// On disagreement the pair of precisions is escalated (twice at most); the
// final values come from the highest-precision run.
inline CorrelationSeries correlation_series(const probability& p, long long n_max,
                                            unsigned precision_bits = 256,
                                            double rel_tol = 1e-12) {
    if (n_max < 2) throw std::invalid_argument("series horizon must be at least 2");
    validate_seed(p);
    auto run = [&](unsigned bits) {
        precision_guard guard(bits);
        big_float pw = p.exact.convert_to<big_float>();
        return detail::series_values(pw, n_max);
    };
    unsigned bits = precision_bits;
    std::vector<big_float> lower = run(bits);
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::vector<big_float> upper = run(bits * 2);
        long long first_bad = -1;
        for (long long n = 0; n <= n_max; ++n) {
            if (!detail::values_agree(lower[static_cast<std::size_t>(n)],
                                      upper[static_cast<std::size_t>(n)], rel_tol)) {
                first_bad = n;
                break;
            }
        }
        if (first_bad < 0) return {p, std::move(upper), precision_bits, bits, rel_tol};
        if (attempt == 2)
            throw numeric_failure("correlation series failed to stabilize at n = " +
                                  std::to_string(first_bad) + " after precision escalation to " +
                                  std::to_string(bits * 2) + " bits");
        lower = std::move(upper);
        bits *= 2;
    }
    throw numeric_failure("unreachable escalation state");
}

// Per-step contraction factors behind the correlation-decay theorem: each
// |C(n)| is compared with the largest |C(k)| on the half-window [n/2, n],
// against the regime bound alpha(p) + eps_p(n).
inline double contraction_alpha(double p) {
    if (p <= 1.0 / 3) return 1 - 2 * p;
    if (p <= 0.5) return p * (3 - 4 * p) / (2 - p);
    return p / (2 - p);
}

inline double contraction_epsilon(double p, long long n) {
    double qn = std::pow(1 - p, static_cast<double>(n));
    if (p <= 1.0 / 3) return 2 * p * qn;
    if (p <= 0.5) return 2 * qn * (1 - p - p * p) / (2 - p);
    return 2 * p * (2 * p - 1) * qn / (2 - p);
}

struct ContractionRow {
    long long n = 0;
    double ratio = 0;
    double bound = 0;
    bool violated = false;
};

struct ContractionReport {
    std::vector<ContractionRow> rows;  // n = 4 .. n_max
    bool any_violation = false;
};

template <class T>
ContractionReport decay_contraction_report(const std::vector<T>& values, double p) {
    ContractionReport report;
    long long n_max = static_cast<long long>(values.size()) - 1;
    for (long long n = 4; n <= n_max; ++n) {
        double cn = std::fabs(static_cast<double>(values[static_cast<std::size_t>(n)]));
        double window = 0;
        for (long long k = n / 2; k <= n; ++k)
            window = std::max(window,
                              std::fabs(static_cast<double>(values[static_cast<std::size_t>(k)])));
        double ratio = window > 0 ? cn / window : 0;
        double bound = contraction_alpha(p) + contraction_epsilon(p, n);
        bool violated = ratio > bound;
        report.any_violation |= violated;
        report.rows.push_back({n, ratio, bound, violated});
    }
    return report;
}

struct DecayHorizon {
    long long horizon = 0;          // least n from which |C| stays below the threshold
    bool beyond_series = false;     // true when dyadic extrapolation was needed
    int blocks_extrapolated = 0;
};

// First point from which the whole trailing half-window sits below the
// threshold; beyond the computed range, dyadic blocks are bounded by the
// contraction factors (valid because each half-window spans at most the two
// previous blocks), which certifies slow-decay cases without evaluating the
// series out to astronomically large n.
template <class T>
DecayHorizon decay_horizon(const std::vector<T>& values, double p, double threshold = 1e-3) {
    long long n_max = static_cast<long long>(values.size()) - 1;
    std::vector<double> mags(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        mags[i] = std::fabs(static_cast<double>(values[i]));

    for (long long n = 4; n <= n_max; ++n) {
        bool all_below = true;
        for (long long k = n / 2; k <= n && all_below; ++k)
            all_below = mags[static_cast<std::size_t>(k)] < threshold;
        if (all_below) return {n, false, 0};
    }

    // Dyadic certificate. D_j bounds max |C| over [2^j, 2^{j+1}).
    int j0 = 0;
    while ((1ll << (j0 + 2)) <= n_max + 1) ++j0;
    if (j0 < 2) throw numeric_failure("series too short to certify a decay horizon");
    double d = 0;
    for (long long k = 1ll << j0; k < (1ll << (j0 + 1)); ++k)
        d = std::max(d, mags[static_cast<std::size_t>(k)]);
    int blocks = 0;
    for (int j = j0 + 1; j < 62; ++j) {
        double r = contraction_alpha(p) + contraction_epsilon(p, 1ll << (j - 1));
        if (r >= 1) throw numeric_failure("contraction factor not below one; cannot certify");
        d *= r;
        ++blocks;
        if (d < threshold) return {1ll << j, true, blocks};
    }
    throw numeric_failure("decay certificate did not reach the threshold within 2^62");
}

}  // namespace expmod
