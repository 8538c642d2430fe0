#pragma once

#include <stdexcept>

#include "numeric.hpp"

namespace expmod {

// Length-distribution weights for substitution compositions and the kernel
// of the correlation recurrence built from them.
//
// nu(p, k, n) is the probability that k-1 independent local substitutions
// emit exactly n-1 symbols: n-k of them expand (two symbols) and 2k-n-1
// modify (one symbol). Index pairs outside that support carry zero mass;
// returning 0 instead of erroring makes the boundary terms of the kernel
// vanish without special cases.

template <class T>
T nu(const T& p, long long k, long long n) {
    if (k < 1 || n < 1 || n - k < 0 || n - k > k - 1) return T(0);
    bigint binom;
    mpz_bin_uiui(binom.backend().data(), static_cast<unsigned long>(k - 1),
                 static_cast<unsigned long>(n - k));
    T q = T(1) - p;
    return binom.template convert_to<T>() * int_pow(q, static_cast<unsigned long long>(n - k)) *
           int_pow(p, static_cast<unsigned long long>(2 * k - n - 1));
}

template <class T>
struct WeightKernel {
    T f, g, h;
    explicit WeightKernel(const T& p)
        : f(p * (2 * p - 1)), g((1 - p) * (1 - 3 * p)), h((1 - p) * (1 - p)) {}
};

template <class T>
T weight_W(const T& p, long long k, long long n) {
    if (k < 1 || n < 2) throw std::out_of_range("kernel indices require k >= 1, n >= 2");
    WeightKernel<T> w(p);
    return w.f * nu(p, k, n) + w.g * nu(p, k, n - 1) + w.h * nu(p, k, n - 2);
}

// Total mass of a nu row, closed form and two-term recursion. These agree
// identically; both are exposed so they can be checked against each other
// and against direct summation.
template <class T>
T S_closed(const T& p, long long n) {
    if (n < 0) throw std::out_of_range("row index must be non-negative");
    T pm1 = p - 1;
    return (T(1) - int_pow(pm1, static_cast<unsigned long long>(n))) / (T(2) - p);
}

template <class T>
T S_recursive(const T& p, long long n) {
    if (n < 0) throw std::out_of_range("row index must be non-negative");
    if (n == 0) return T(0);
    T prev(0), cur(1);
    for (long long i = 1; i < n; ++i) {
        T next = p * cur + (T(1) - p) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// Closed form for the kernel row sum as the source material states it. It
// disagrees with direct summation for p != 1/2 (see the corrected variant
// below); it is kept verbatim because the verification suite reports its
// deviation honestly instead of silently patching it.
template <class T>
T weight_sum_claimed(const T& p, long long n) {
    T pm1 = p - 1;
    return (1 - 2 * p) * (2 - 3 * p) / (2 - p) -
           2 * p * int_pow(pm1, static_cast<unsigned long long>(n));
}

// Corrected closed form, derived by summing f/g/h against the three shifted
// row masses: sum_k W(k,n) = f S(n) + g S(n-1) + h S(n-2). Matches direct
// summation exactly in rational arithmetic.
template <class T>
T weight_sum_corrected(const T& p, long long n) {
    T pm1 = p - 1;
    return ((1 - 2 * p) * (2 - 3 * p) -
            2 * p * (1 + p) * int_pow(pm1, static_cast<unsigned long long>(n))) /
           (2 - p);
}

// Direct summation over the full support of the three shifted rows.
template <class T>
T weight_sum_direct(const T& p, long long n) {
    T acc(0);
    for (long long k = n / 2; k <= n; ++k) {
        if (k < 1) continue;
        acc += weight_W(p, k, n);
    }
    return acc;
}

}  // namespace expmod
